from __future__ import annotations

from typing import Optional


class AnalyzerError(RuntimeError):
    def __init__(self, message: str, detail: Optional[str] = None) -> None:
        super().__init__(message)
        self.detail = detail

    def __str__(self) -> str:
        base = super().__str__()
        if not self.detail:
            return base
        return f"{base} ({self.detail})"


# ---- graph_core ----
class TooFewAgents(AnalyzerError):
    pass


class SelfLoop(AnalyzerError):
    def __init__(self, vertex: int) -> None:
        super().__init__(f"Self-loop at vertex {vertex}", detail=f"vertex={vertex}")
        self.vertex = vertex


class IndexOutOfRange(AnalyzerError):
    def __init__(self, vertex: int, n: int) -> None:
        super().__init__(f"Vertex {vertex} outside 0..{n - 1}", detail=f"vertex={vertex}, n={n}")
        self.vertex = vertex


class NonIntegerIndex(AnalyzerError):
    def __init__(self, value: object) -> None:
        super().__init__(f"Vertex index {value!r} is not an integer", detail=f"value={value!r}")
        self.value = value


class WeightedEdge(AnalyzerError):
    pass


class EigenFailure(AnalyzerError):
    pass


class DisconnectedGraph(AnalyzerError):
    pass


# ---- pattern ----
class BadDimension(AnalyzerError):
    pass


class NonUnitDiagonal(AnalyzerError):
    def __init__(self, index: int, value: float) -> None:
        super().__init__(f"Pattern diagonal entry {index} must be 1", detail=f"a[{index}][{index}]={value!r}")
        self.index = index


# ---- stability ----
class HypothesisViolated(AnalyzerError):
    pass


# ---- quasipoly ----
class NoConvergence(AnalyzerError):
    pass


# ---- dde_sim ----
class StepTooLarge(AnalyzerError):
    pass


class NonFiniteState(AnalyzerError):
    def __init__(self, time: float) -> None:
        super().__init__("Non-finite state encountered", detail=f"t={time:.6g}")
        self.time = time


# ---- config ----
class ConfigError(AnalyzerError):
    pass
