from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from main import SCENARIO_DIR
from models import load_run_config
from pipeline import run_pipeline
from settings import get_settings

THEORY = {
    "fig4a": "ConsensusGuaranteed",
    "fig4b": "ConsensusGuaranteed",
    "fig4c": "ConsensusGuaranteed",
    "fig5a": "OutsideTheory",
    "fig5b": "OutsideTheory",
    "fig5c": "OutsideTheory",
    "fig6a": "UnstableGuaranteed",
    "fig6b": "UnstableGuaranteed",
    "fig6c": "UnstableGuaranteed",
    "fig7a": "ConsensusGuaranteed",
    "fig7b": "ConsensusGuaranteed",
    "fig7c": "ConsensusGuaranteed",
    "fig7d": "OutsideTheory",
    "fig7e": "OutsideTheory",
    "fig7f": "OutsideTheory",
}

SIM = {
    "fig4a": "Converged",
    "fig4b": "Converged",
    "fig4c": "Converged",
    "fig5a": "Bounded",
    "fig5b": "Bounded",
    "fig5c": "Bounded",
    "fig6a": "Diverged",
    "fig6b": "Diverged",
    "fig6c": "Diverged",
    "fig7a": "Bounded",
    "fig7b": "Converged",
    "fig7c": "Converged",
    "fig7d": "Diverged",
    "fig7e": "Diverged",
    "fig7f": "Diverged",
}


def _run(name: str, **kw):
    cfg = load_run_config(SCENARIO_DIR / f"{name}.json")
    return run_pipeline(cfg, cfg.settings(get_settings()), **kw)


def test_every_scenario_is_shipped():
    shipped = sorted(p.stem for p in Path(SCENARIO_DIR).glob("*.json"))
    assert shipped == sorted(THEORY)


@pytest.mark.parametrize("name", sorted(THEORY))
def test_scenario_theory_verdict(name):
    state = _run(name)
    assert state.report.verdict == THEORY[name]


def test_reported_margin_matches_quoted_value():
    report = _run("fig7b").report
    assert report.tau_max == pytest.approx(0.23, abs=5e-4)


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(SIM))
def test_scenario_simulation(name):
    state = _run(name, sim=True)
    summary = state.sim_summary
    assert summary["classification"] == SIM[name]
    scale = max(1.0, float(np.max(np.abs(state.trajectory.states))))
    assert summary["conservation_drift"] < 1e-6 * scale
    if SIM[name] == "Converged":
        assert summary["final_disagreement"] < 1e-6
        x0 = state.trajectory.states[0].reshape(4, 2).mean(axis=0)
        assert np.allclose(summary["value"], x0, atol=1e-5)
    if name == "fig7a":
        assert summary["oscillation_frequency"] == pytest.approx(4.0 * (1.0 + math.sqrt(0.5)), abs=0.05)


@pytest.mark.slow
def test_theory_consensus_never_diverges_in_simulation():
    for name, verdict in THEORY.items():
        if verdict == "ConsensusGuaranteed":
            assert _run(name, sim=True).sim_summary["classification"] != "Diverged"
