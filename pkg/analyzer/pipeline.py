from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional

from langgraph.graph import END, StateGraph

from dde_sim import SimConfig, conservation_drift, oscillation_frequency, simulate
from graph_core import laplacian_spectrum
from pattern import cross_spectrum, pattern_eigenvalues
from pipeline_state import PipelineState
from quasipoly import CharInstance, imag_axis_crossings, network_abscissae, oracle_summary, scan_magnitude
from settings import AnalyzerSettings
from stability import DelayPair, classify

logger = logging.getLogger(__name__)


def build_inputs(state: PipelineState) -> PipelineState:
    cfg = state.run_config
    state.graph = cfg.build_graph()
    state.pattern = cfg.build_pattern()
    if state.delays is None and cfg.delays is not None:
        state.delays = cfg.delay_pair()
    return state


def compute_spectra(state: PipelineState) -> PipelineState:
    state.laplacian = laplacian_spectrum(state.graph)
    state.pattern_spectrum = cross_spectrum(state.pattern)
    state.pattern_eigs = list(pattern_eigenvalues(state.pattern))
    return state


def classify_delays(state: PipelineState) -> PipelineState:
    if state.theory == "optional" and not state.laplacian.connected(state.settings.zero_tol):
        logger.warning("graph is disconnected; skipping margin analysis (lambda2=%.3g)", state.laplacian.lambda2)
        return state
    state.report = classify(state.laplacian, state.pattern_spectrum, state.delays, tol=state.settings.margin_tol)
    return state


def _oracle_verdict(abscissa: float, tol: float) -> str:
    if abscissa < -tol:
        return "stable"
    if abscissa > tol:
        return "unstable"
    return "marginal"


def run_oracle(state: PipelineState) -> PipelineState:
    settings = state.settings
    modes = network_abscissae(state.laplacian, state.pattern_spectrum, state.delays, workers=1)
    summary = oracle_summary(modes, settings.oracle_tol)
    summary["crossings"] = []
    for mode in modes:
        inst = CharInstance(lam=mode.lam, mu=mode.mu, tau1=state.delays.tau1, tau2=state.delays.tau2)
        scan = imag_axis_crossings(inst, inst.omega_bound)
        summary["crossings"].append({"lambda": mode.lam, "mu": [mode.mu.real, mode.mu.imag], "omega": scan.crossings})
    summary["agrees_with_theory"] = _agrees(state.report.verdict, summary["rightmost_abscissa"], settings.oracle_tol)
    state.oracle = summary
    state.oracle_verdict = _oracle_verdict(summary["rightmost_abscissa"], settings.oracle_tol)
    if summary["agrees_with_theory"] is False:
        logger.warning(
            "oracle disagrees with theory at tau=(%g, %g): verdict %s, rightmost abscissa %.3g",
            state.delays.tau1,
            state.delays.tau2,
            state.report.verdict,
            summary["rightmost_abscissa"],
        )

    if state.dump_scans:
        lambdas: List[float] = []
        for mode in modes:
            if mode.lam not in lambdas:
                lambdas.append(mode.lam)
        for mode in modes:
            inst = CharInstance(lam=mode.lam, mu=mode.mu, tau1=state.delays.tau1, tau2=state.delays.tau2)
            omega, mag = scan_magnitude(inst, inst.omega_bound)
            state.scans.append(
                {
                    "i": lambdas.index(mode.lam) + 2,
                    "k": state.pattern_spectrum.mu.index(mode.mu) + 1,
                    "omega": omega,
                    "magnitude": mag,
                }
            )
    return state


def _agrees(verdict: Optional[str], abscissa: float, tol: float) -> Optional[bool]:
    if verdict == "ConsensusGuaranteed":
        return abscissa < tol
    if verdict == "UnstableGuaranteed":
        return abscissa > -tol
    return None


def run_simulation(state: PipelineState) -> PipelineState:
    settings = state.settings
    cfg = state.run_config
    horizon, step = cfg.sim_horizon_step(settings)
    sim = cfg.simulation
    sim_cfg = SimConfig(
        graph=state.graph,
        pattern=state.pattern,
        delays=state.delays,
        x0=tuple(sim.x0) if sim.x0 is not None else None,
        horizon=horizon,
        step=step,
        history=sim.history,
        seed=state.seed if state.seed is not None else sim.seed,
        record_stride=sim.record_stride,
        divergence_threshold=settings.divergence_threshold,
    )
    traj = simulate(sim_cfg, settings=settings)
    cls = traj.classification
    state.trajectory = traj
    state.sim_summary = {
        "classification": cls.kind,
        "value": list(cls.value) if cls.value is not None else None,
        "at_time": cls.at_time,
        "initial_disagreement": float(traj.disagreement[0]),
        "final_disagreement": float(traj.disagreement[-1]),
        "final_time": float(traj.times[-1]),
        "conservation_drift": conservation_drift(traj),
        "oscillation_frequency": oscillation_frequency(traj) if cls.kind == "Bounded" else None,
        "step": traj.step / sim.record_stride,
        "aborted": traj.aborted,
    }
    return state


def _after_spectra(state: PipelineState) -> str:
    if state.delays is None:
        return END
    if state.theory == "off":
        return "run_simulation" if state.run_sim else END
    return "classify_delays"


def _after_classify(state: PipelineState) -> str:
    if state.run_oracle and state.report is not None:
        return "run_oracle"
    return "run_simulation" if state.run_sim else END


def build_analysis_graph():
    g = StateGraph(PipelineState)

    g.add_node("build_inputs", build_inputs)
    g.add_node("compute_spectra", compute_spectra)
    g.add_node("classify_delays", classify_delays)
    g.add_node("run_oracle", run_oracle)
    g.add_node("run_simulation", run_simulation)

    g.set_entry_point("build_inputs")
    g.add_edge("build_inputs", "compute_spectra")
    g.add_conditional_edges(
        "compute_spectra",
        _after_spectra,
        {
            "classify_delays": "classify_delays",
            "run_simulation": "run_simulation",
            END: END,
        },
    )
    g.add_conditional_edges(
        "classify_delays",
        _after_classify,
        {
            "run_oracle": "run_oracle",
            "run_simulation": "run_simulation",
            END: END,
        },
    )
    g.add_conditional_edges(
        "run_oracle",
        lambda s: "run_simulation" if s.run_sim else END,
        {
            "run_simulation": "run_simulation",
            END: END,
        },
    )
    g.add_edge("run_simulation", END)

    return g.compile()


def _coerce_state(values: Any, fallback: PipelineState) -> PipelineState:
    if isinstance(values, PipelineState):
        return values
    if isinstance(values, dict):
        return fallback.model_copy(update=values)
    return fallback


_GRAPH = None


def get_analysis_graph():
    global _GRAPH
    if _GRAPH is None:
        _GRAPH = build_analysis_graph()
    return _GRAPH


def run_pipeline(
    run_config,
    settings: AnalyzerSettings,
    *,
    delays: Optional[DelayPair] = None,
    oracle: bool = False,
    sim: bool = False,
    dump_scans: bool = False,
    seed: Optional[int] = None,
    theory: str = "required",
) -> PipelineState:
    """Drive one configuration through spectra, classification and the optional oracle and simulation stages."""
    start = PipelineState(
        run_config=run_config,
        settings=settings,
        delays=delays,
        run_oracle=oracle,
        run_sim=sim,
        dump_scans=dump_scans,
        seed=seed,
        theory=theory,
    )
    values = get_analysis_graph().invoke(start)
    return _coerce_state(values, start)


def point_row(state: PipelineState) -> Dict[str, Any]:
    return {
        "tau1": state.delays.tau1,
        "tau2": state.delays.tau2,
        "theory": state.report.verdict if state.report else "",
        "oracle": state.oracle_verdict or "",
        "sim": state.sim_summary["classification"] if state.sim_summary else "",
    }
