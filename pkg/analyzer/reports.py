from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from dde_sim import Trajectory
from errors import HypothesisViolated
from pattern import gershgorin_bound
from pipeline_state import PipelineState
from stability import mode_margins, two_layer_margins

SWEEP_COLUMNS = ("tau1", "tau2", "theory", "oracle", "sim")


def fmt(value: float) -> str:
    """9 significant digits, the precision every CSV column is written with."""
    return f"{float(value):.9g}"


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(value.item())
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _open_csv(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", newline="", encoding="utf-8")


def spectra_payload(state: PipelineState) -> Dict[str, Any]:
    s = state.pattern_spectrum
    return {
        "graph": {
            "n": state.graph.n,
            "edges": state.graph.edges_one_based(),
            "laplacian_eigenvalues": list(state.laplacian.values),
            "lambda2": state.laplacian.lambda2,
            "lambda_max": state.laplacian.lambda_max,
        },
        "pattern": {
            "matrix": state.pattern.rows(),
            "eigenvalues_A": list(state.pattern_eigs),
            "mu": list(s.mu),
            "zeta": list(s.zeta),
            "alpha": list(s.alpha),
            "c_k": list(s.c_k),
            "c": s.c,
            "zeta_max": s.zeta_max,
            "zeta_prime_max": s.zeta_prime_max,
            "b_max": s.b_max,
            "mu_max_abs": s.mu_max_abs,
            "gershgorin_inside_unit_disk": gershgorin_bound(state.pattern),
        },
    }


def _two_layer_block(state: PipelineState) -> Optional[Dict[str, Any]]:
    if state.pattern.d != 2:
        return None
    a = state.pattern.a
    try:
        return two_layer_margins(a[0][1], a[1][0], state.laplacian.lambda_max).model_dump()
    except HypothesisViolated as exc:
        return {"error": str(exc)}


def analysis_payload(state: PipelineState) -> Dict[str, Any]:
    payload = spectra_payload(state)
    payload["margins"] = state.report.model_dump()
    if state.pattern_spectrum.mu_max_abs < 1.0:
        payload["mode_margins"] = mode_margins(state.laplacian, state.pattern_spectrum)
    payload["two_layer"] = _two_layer_block(state)
    payload["oracle"] = state.oracle
    if state.sim_summary is not None:
        payload["simulation"] = state.sim_summary
    return payload


def write_analysis(out_dir: Path, state: PipelineState) -> Path:
    path = write_json(out_dir / "analysis.json", analysis_payload(state))
    for scan in state.scans:
        write_scan_csv(out_dir / f"scan_{scan['i']}_{scan['k']}.csv", scan["omega"], scan["magnitude"])
    return path


def write_spectrum(out_dir: Path, state: PipelineState) -> Path:
    return write_json(out_dir / "spectrum.json", spectra_payload(state))


def write_scan_csv(path: Path, omega: Sequence[float], magnitude: Sequence[float]) -> Path:
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["omega", "abs_f"])
        for w, m in zip(omega, magnitude):
            writer.writerow([fmt(w), fmt(m)])
    return path


def write_trajectory_csv(path: Path, traj: Trajectory) -> Path:
    """Long format: one row per (t, agent, layer); agents and layers 1-based."""
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "agent", "layer", "value"])
        for t, state in zip(traj.times, traj.states):
            agents = state.reshape(traj.n, traj.d)
            t_str = fmt(t)
            for i in range(traj.n):
                for p in range(traj.d):
                    writer.writerow([t_str, i + 1, p + 1, fmt(agents[i, p])])
    return path


def write_disagreement_csv(path: Path, traj: Trajectory) -> Path:
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "disagreement"])
        for t, value in zip(traj.times, traj.disagreement):
            writer.writerow([fmt(t), fmt(value)])
    return path


def write_simulation(out_dir: Path, state: PipelineState) -> Path:
    write_trajectory_csv(out_dir / "trajectory.csv", state.trajectory)
    write_disagreement_csv(out_dir / "disagreement.csv", state.trajectory)
    summary = {
        "name": state.run_config.name,
        "tau1": state.delays.tau1,
        "tau2": state.delays.tau2,
        "theory": state.report.verdict if state.report else None,
        **state.sim_summary,
    }
    return write_json(out_dir / "summary.json", summary)


def write_sweep_csv(path: Path, rows: Iterable[Dict[str, Any]]) -> Path:
    with _open_csv(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([fmt(row["tau1"]), fmt(row["tau2"]), row["theory"], row["oracle"], row["sim"]])
    return path


def read_sweep_csv(path: Path) -> List[Dict[str, str]]:
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))
