from __future__ import annotations

import logging
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from models import RunConfig
from pipeline import point_row, run_pipeline
from reports import write_sweep_csv
from settings import AnalyzerSettings
from stability import DelayPair

logger = logging.getLogger(__name__)

ExecutorKind = Literal["process", "thread"]


def evaluate_point(
    run_config: RunConfig,
    settings: AnalyzerSettings,
    delays: DelayPair,
    oracle: bool,
    sim: bool,
    seed: Optional[int],
) -> Dict[str, Any]:
    state = run_pipeline(run_config, settings, delays=delays, oracle=oracle, sim=sim, seed=seed)
    row = point_row(state)
    _check_consistency(row)
    return row


def _check_consistency(row: Dict[str, Any]) -> None:
    if row["theory"] != "ConsensusGuaranteed" or not row["sim"]:
        return
    if row["sim"] == "Bounded":
        logger.warning(
            "tau=(%g, %g): theory guarantees consensus but the simulation is only Bounded; horizon likely too short",
            row["tau1"],
            row["tau2"],
        )
    elif row["sim"] == "Diverged":
        logger.error("tau=(%g, %g): simulation diverged where theory guarantees consensus", row["tau1"], row["tau2"])


def _make_executor(kind: ExecutorKind, workers: int) -> Executor:
    if kind == "thread":
        return ThreadPoolExecutor(max_workers=workers)
    return ProcessPoolExecutor(max_workers=workers)


def run_sweep(
    run_config: RunConfig,
    settings: AnalyzerSettings,
    out_path: Path,
    *,
    oracle: bool = False,
    sim: bool = False,
    seed: Optional[int] = None,
    executor: ExecutorKind = "process",
) -> List[Dict[str, Any]]:
    """
    Evaluate every grid point and write the phase-map CSV in grid order.
    On interrupt the points finished so far are written before re-raising.
    """
    if run_config.grid is not None:
        points = list(run_config.grid.points())
    else:
        points = [run_config.delay_pair()]
    done: Dict[int, Dict[str, Any]] = {}

    def _flush() -> List[Dict[str, Any]]:
        rows = [done[i] for i in sorted(done)]
        write_sweep_csv(out_path, rows)
        return rows

    workers = settings.workers
    try:
        if workers <= 1 or len(points) <= 1:
            for idx, delays in enumerate(points):
                done[idx] = evaluate_point(run_config, settings, delays, oracle, sim, seed)
        else:
            with _make_executor(executor, workers) as pool:
                futures = {
                    pool.submit(evaluate_point, run_config, settings, delays, oracle, sim, seed): idx
                    for idx, delays in enumerate(points)
                }
                try:
                    for fut in as_completed(futures):
                        done[futures[fut]] = fut.result()
                except KeyboardInterrupt:
                    pool.shutdown(wait=False, cancel_futures=True)
                    raise
    except KeyboardInterrupt:
        rows = _flush()
        logger.warning("sweep interrupted; wrote %d of %d points to %s", len(rows), len(points), out_path)
        raise
    return _flush()


def verdict_flips(rows: List[Dict[str, Any]], column: str = "theory") -> List[Tuple[float, float]]:
    """Delay pairs at which the verdict in `column` changes from the previous row."""
    flips: List[Tuple[float, float]] = []
    for prev, cur in zip(rows, rows[1:]):
        if prev[column] != cur[column]:
            flips.append((cur["tau1"], cur["tau2"]))
    return flips
