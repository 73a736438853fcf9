# models.py
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, StrictInt, ValidationError, field_validator, model_validator

from errors import AnalyzerError, ConfigError
from graph_core import GRAPH_FAMILIES, Graph, build_graph_one_based, family_graph
from pattern import InteractionPattern, build_pattern
from settings import AnalyzerSettings, get_settings
from stability import DelayPair

HistoryName = Literal["constant", "linear-to-zero"]
# 1-based (i, j), optionally with a unit weight
EdgeSpec = Union[Tuple[StrictInt, StrictInt], Tuple[StrictInt, StrictInt, float]]


class GraphSpec(BaseModel):
    """
    Either a named family with n agents, or an explicit 1-based edge list over n agents.
    """

    n: int = Field(ge=2)
    family: Optional[str] = None
    edges: Optional[List[EdgeSpec]] = None

    @model_validator(mode="after")
    def _one_form(self) -> "GraphSpec":
        if (self.family is None) == (self.edges is None):
            raise ValueError("exactly one of 'family' or 'edges' is required")
        if self.family is not None and self.family.strip().lower() not in GRAPH_FAMILIES:
            raise ValueError(f"family must be one of {', '.join(GRAPH_FAMILIES)}")
        return self

    def build(self) -> Graph:
        if self.family is not None:
            return family_graph(self.family, self.n)
        return build_graph_one_based(self.n, self.edges or [])


class DelaySpec(BaseModel):
    tau1: float = Field(ge=0)
    tau2: float = Field(ge=0)

    def pair(self) -> DelayPair:
        return DelayPair(self.tau1, self.tau2)


class DelayGrid(BaseModel):
    tau1_min: float = Field(ge=0)
    tau1_max: float = Field(ge=0)
    tau1_steps: int = Field(default=1, ge=1)
    tau2_min: float = Field(default=0.0, ge=0)
    tau2_max: float = Field(default=0.0, ge=0)
    tau2_steps: int = Field(default=1, ge=1)
    # pair the τ1 axis with itself (τ1 = τ2) instead of a full product
    diagonal: bool = False

    @model_validator(mode="after")
    def _ordered(self) -> "DelayGrid":
        if self.tau1_min > self.tau1_max:
            raise ValueError("tau1_min must not exceed tau1_max")
        if not self.diagonal and self.tau2_min > self.tau2_max:
            raise ValueError("tau2_min must not exceed tau2_max")
        return self

    def tau1_axis(self) -> np.ndarray:
        return np.linspace(self.tau1_min, self.tau1_max, self.tau1_steps)

    def tau2_axis(self) -> np.ndarray:
        return np.linspace(self.tau2_min, self.tau2_max, self.tau2_steps)

    def points(self) -> Iterator[DelayPair]:
        if self.diagonal:
            for tau in self.tau1_axis():
                yield DelayPair(float(tau), float(tau))
            return
        for tau1 in self.tau1_axis():
            for tau2 in self.tau2_axis():
                yield DelayPair(float(tau1), float(tau2))


class SimulationSpec(BaseModel):
    horizon: Optional[float] = Field(default=None, gt=0)
    step: Optional[float] = Field(default=None, gt=0)
    x0: Optional[List[float]] = None
    seed: Optional[int] = None
    history: HistoryName = "constant"
    record_stride: int = Field(default=1, ge=1)


class ToleranceOverrides(BaseModel):
    zero_tol: Optional[float] = Field(default=None, gt=0)
    margin_tol: Optional[float] = Field(default=None, gt=0)
    oracle_tol: Optional[float] = Field(default=None, gt=0)
    convergence_eps: Optional[float] = Field(default=None, gt=0)
    convergence_window: Optional[float] = Field(default=None, gt=0)
    divergence_threshold: Optional[float] = Field(default=None, gt=0)


class RunConfig(BaseModel):
    name: Optional[str] = None
    description: str = ""
    graph: GraphSpec
    pattern: List[List[float]]
    delays: Optional[DelaySpec] = None
    grid: Optional[DelayGrid] = None
    simulation: SimulationSpec = Field(default_factory=SimulationSpec)
    output_dir: str = "out"
    tolerances: ToleranceOverrides = Field(default_factory=ToleranceOverrides)
    oracle: bool = False
    simulate: bool = False
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("pattern")
    @classmethod
    def _valid_pattern(cls, value: List[List[float]]) -> List[List[float]]:
        try:
            build_pattern(value)
        except AnalyzerError as exc:
            raise ValueError(str(exc)) from exc
        return value

    @model_validator(mode="after")
    def _delay_source(self) -> "RunConfig":
        if self.delays is None and self.grid is None:
            raise ValueError("either 'delays' or 'grid' is required")
        return self

    def build_graph(self) -> Graph:
        return self.graph.build()

    def build_pattern(self) -> InteractionPattern:
        return build_pattern(self.pattern)

    def delay_pair(self) -> DelayPair:
        if self.delays is None:
            raise ConfigError("This command needs a single 'delays' block", detail="only 'grid' given")
        return self.delays.pair()

    def settings(self, base: Optional[AnalyzerSettings] = None) -> AnalyzerSettings:
        base = base or get_settings()
        return base.with_overrides(
            workers=self.workers,
            **self.tolerances.model_dump(),
        )

    def sim_horizon_step(self, settings: AnalyzerSettings) -> Tuple[float, float]:
        horizon = self.simulation.horizon if self.simulation.horizon is not None else settings.sim_horizon
        step = self.simulation.step if self.simulation.step is not None else settings.sim_step
        return horizon, step


def _format_loc(loc: Tuple[Union[int, str], ...]) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_run_config(text: str, *, source: str = "<config>") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{source} is not valid JSON",
            detail=f"line {exc.lineno}, column {exc.colno}: {exc.msg}",
        ) from exc
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        problems = "; ".join(f"{_format_loc(err['loc'])}: {err['msg']}" for err in exc.errors())
        raise ConfigError(f"{source} failed validation", detail=problems) from exc


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}", detail=str(exc)) from exc
    return parse_run_config(text, source=str(path))
