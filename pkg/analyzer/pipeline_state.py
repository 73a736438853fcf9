from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from dde_sim import Trajectory
from graph_core import Graph, LaplacianSpectrum
from models import RunConfig
from pattern import InteractionPattern, PatternSpectrum
from settings import AnalyzerSettings
from stability import DelayPair, MarginReport


class PipelineState(BaseModel):
    """
    Runtime snapshot threaded through the analysis graph.

    Every stage reads what it needs from here and writes its result back.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    # ---- Inputs ----
    run_config: RunConfig
    settings: AnalyzerSettings
    delays: Optional[DelayPair] = None
    run_oracle: bool = False
    run_sim: bool = False
    dump_scans: bool = False
    seed: Optional[int] = None
    # required: classify or fail; optional: skipped on a disconnected graph; off: spectra only
    theory: Literal["required", "optional", "off"] = "required"

    # ---- Derived ----
    graph: Optional[Graph] = None
    pattern: Optional[InteractionPattern] = None
    laplacian: Optional[LaplacianSpectrum] = None
    pattern_spectrum: Optional[PatternSpectrum] = None
    pattern_eigs: List[complex] = Field(default_factory=list)

    # ---- Results ----
    report: Optional[MarginReport] = None
    oracle: Optional[Dict[str, Any]] = None
    oracle_verdict: Optional[str] = None
    scans: List[Dict[str, Any]] = Field(default_factory=list)
    trajectory: Optional[Trajectory] = None
    sim_summary: Optional[Dict[str, Any]] = None
