from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Any, Optional

from dotenv import load_dotenv

_ENV_PATH = os.path.join(os.path.dirname(__file__), ".env")
load_dotenv(_ENV_PATH)


@dataclass(frozen=True)
class AnalyzerSettings:
    zero_tol: float = 1e-9
    margin_tol: float = 1e-9
    oracle_tol: float = 1e-6
    sim_step: float = 1e-3
    sim_horizon: float = 30.0
    divergence_threshold: float = 1e6
    convergence_eps: float = 1e-6
    convergence_window: float = 1.0
    workers: int = 1
    log_level: str = "WARNING"

    def with_overrides(self, **overrides: Any) -> "AnalyzerSettings":
        """Return a copy with every non-None override applied."""
        updates = {key: val for key, val in overrides.items() if val is not None}
        return replace(self, **updates) if updates else self


def _read_env(*keys: str) -> Optional[str]:
    for key in keys:
        val = os.getenv(key)
        if val:
            return val.strip()
    return None


def _env_float(key: str, default: float) -> float:
    raw = _read_env(key)
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError:
        return default


def _env_int(key: str, default: int) -> int:
    raw = _read_env(key)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def _load_settings() -> AnalyzerSettings:
    return AnalyzerSettings(
        zero_tol=_env_float("ANALYZER_ZERO_TOL", 1e-9),
        margin_tol=_env_float("ANALYZER_MARGIN_TOL", 1e-9),
        oracle_tol=_env_float("ANALYZER_ORACLE_TOL", 1e-6),
        sim_step=_env_float("ANALYZER_SIM_STEP", 1e-3),
        sim_horizon=_env_float("ANALYZER_SIM_HORIZON", 30.0),
        divergence_threshold=_env_float("ANALYZER_DIVERGENCE_THRESHOLD", 1e6),
        convergence_eps=_env_float("ANALYZER_CONVERGENCE_EPS", 1e-6),
        convergence_window=_env_float("ANALYZER_CONVERGENCE_WINDOW", 1.0),
        workers=_env_int("ANALYZER_WORKERS", 1),
        log_level=(_read_env("ANALYZER_LOG_LEVEL") or "WARNING").upper(),
    )


@lru_cache(maxsize=1)
def get_settings() -> AnalyzerSettings:
    return _load_settings()


def configure_logging(level: Optional[str] = None) -> None:
    """Route every analyzer logger to stderr; stdout stays reserved for summaries."""
    resolved = (level or get_settings().log_level).upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, resolved, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
