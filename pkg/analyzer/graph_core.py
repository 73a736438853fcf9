from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import linalg

from errors import EigenFailure, IndexOutOfRange, NonIntegerIndex, SelfLoop, TooFewAgents, WeightedEdge
from settings import get_settings

Edge = Tuple[int, int]

GRAPH_FAMILIES = ("cycle", "path", "complete", "star")


@dataclass(frozen=True)
class Graph:
    """
    Undirected simple graph over agents 0..n-1 with unit edge weights.
    Edges are stored as sorted (i, j) pairs with i < j.
    """

    n: int
    edges: Tuple[Edge, ...]

    def neighbors(self, i: int) -> List[int]:
        out = [b for a, b in self.edges if a == i]
        out.extend(a for a, b in self.edges if b == i)
        return sorted(out)

    def adjacency(self) -> np.ndarray:
        w = np.zeros((self.n, self.n))
        for i, j in self.edges:
            w[i, j] = 1.0
            w[j, i] = 1.0
        return w

    def edges_one_based(self) -> List[List[int]]:
        return [[i + 1, j + 1] for i, j in self.edges]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class LaplacianSpectrum:
    values: Tuple[float, ...]

    @property
    def lambda_max(self) -> float:
        return self.values[-1]

    @property
    def lambda2(self) -> float:
        return self.values[1]

    def nonzero(self) -> Tuple[float, ...]:
        # λ_2..λ_n; only these enter the disagreement dynamics
        return self.values[1:]

    def connected(self, tol: Optional[float] = None) -> bool:
        tol = get_settings().zero_tol if tol is None else tol
        return self.lambda2 > tol


def _vertex(value) -> int:
    if isinstance(value, bool):
        raise NonIntegerIndex(value)
    try:
        as_float = float(value)
    except (TypeError, ValueError):
        raise NonIntegerIndex(value) from None
    if not as_float.is_integer():
        raise NonIntegerIndex(value)
    return int(as_float)


def _coerce_edge(raw: Sequence) -> Edge:
    if len(raw) == 3:
        if float(raw[2]) != 1.0:
            raise WeightedEdge("Weighted edges are not supported", detail=f"edge={list(raw)!r}")
    elif len(raw) != 2:
        raise WeightedEdge("Edges must be pairs", detail=f"edge={list(raw)!r}")
    return _vertex(raw[0]), _vertex(raw[1])


def build_graph(n: int, edges: Iterable[Sequence]) -> Graph:
    n = int(n)
    if n < 2:
        raise TooFewAgents("A network needs at least 2 agents", detail=f"n={n}")
    normalized = set()
    for raw in edges:
        i, j = _coerce_edge(raw)
        if i == j:
            raise SelfLoop(i)
        for v in (i, j):
            if v < 0 or v >= n:
                raise IndexOutOfRange(v, n)
        normalized.add((min(i, j), max(i, j)))
    return Graph(n=n, edges=tuple(sorted(normalized)))


def build_graph_one_based(n: int, edges: Iterable[Sequence]) -> Graph:
    shifted = []
    for raw in edges:
        pair = list(raw)
        pair[0] = _vertex(pair[0]) - 1
        pair[1] = _vertex(pair[1]) - 1
        shifted.append(pair)
    return build_graph(n, shifted)


def family_graph(family: str, n: int) -> Graph:
    """Build one of the named families: cycle, path, complete, star (hub = agent 0)."""
    key = (family or "").strip().lower()
    if int(n) < 2:
        raise TooFewAgents("A network needs at least 2 agents", detail=f"n={n}")
    if key == "cycle":
        g = nx.cycle_graph(n) if n > 2 else nx.path_graph(n)
    elif key == "path":
        g = nx.path_graph(n)
    elif key == "complete":
        g = nx.complete_graph(n)
    elif key == "star":
        g = nx.star_graph(n - 1)
    else:
        raise ValueError(f"Unknown graph family: {family!r} (expected one of {', '.join(GRAPH_FAMILIES)})")
    return build_graph(n, g.edges())


def is_connected(g: Graph) -> bool:
    return nx.is_connected(g.to_networkx())


def laplacian(g: Graph) -> np.ndarray:
    w = g.adjacency()
    return np.diag(w.sum(axis=1)) - w


def laplacian_spectrum(g: Graph) -> LaplacianSpectrum:
    lap = laplacian(g)
    try:
        values = linalg.eigh(lap, eigvals_only=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure("Symmetric eigensolver failed on the Laplacian", detail=str(exc)) from exc
    values = np.sort(values)
    return LaplacianSpectrum(values=tuple(float(v) for v in values))
