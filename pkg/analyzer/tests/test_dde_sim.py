from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from dde_sim import (
    Classification,
    SimConfig,
    Trajectory,
    classify_trajectory,
    consensus_value,
    conservation_drift,
    delay_free_solution,
    disagreement_norm,
    initial_state,
    oscillation_frequency,
    resolve_step,
    simulate,
    system_matrices,
)
from errors import ConfigError, NonFiniteState, StepTooLarge
from graph_core import build_graph, laplacian
from pattern import build_pattern, cross_spectrum
from stability import DelayPair, delay_free_consensus


def _cfg(graph, pattern, tau1, tau2, **kw) -> SimConfig:
    kw.setdefault("seed", 7)
    return SimConfig(graph=graph, pattern=pattern, delays=DelayPair(tau1, tau2), **kw)


def test_disagreement_norm_examples():
    assert disagreement_norm(np.array([3.0, 3.0, 3.0]), 3, 1) == 0.0
    assert disagreement_norm(np.array([1.0, -1.0]), 2, 1) == pytest.approx(math.sqrt(2))
    assert disagreement_norm(np.array([1.0, 0.0, 1.0, 0.0]), 2, 2) == 0.0


def test_consensus_value_examples():
    assert consensus_value([2.0, 5.0] * 3, 3, 2).tolist() == [2.0, 5.0]
    assert consensus_value([1, 0, 0, 1, -1, 0, 0, -1], 4, 2).tolist() == [0.0, 0.0]
    assert consensus_value([1, 2, 3, 4], 2, 2).tolist() == [2.0, 3.0]


def test_system_matrices_sum_to_full_coupling(c4, a1):
    intra, cross = system_matrices(c4, a1)
    full = np.kron(laplacian(c4), a1.matrix())
    assert np.allclose((intra + cross).toarray(), full)


def test_seeded_initial_state_is_reproducible(c4, a1):
    x0 = initial_state(_cfg(c4, a1, 0.1, 0.1))
    assert x0.shape == (8,)
    assert np.all(np.abs(x0) <= 5.0)
    assert np.array_equal(x0, initial_state(_cfg(c4, a1, 0.1, 0.1)))
    assert not np.array_equal(x0, initial_state(_cfg(c4, a1, 0.1, 0.1, seed=8)))


def test_explicit_x0_length_checked(c4, a1):
    with pytest.raises(ConfigError):
        initial_state(_cfg(c4, a1, 0.1, 0.1, x0=(1.0, 2.0)))


def test_step_is_shrunk_for_short_delays(c4, a1, caplog):
    with caplog.at_level(logging.WARNING, logger="dde_sim"):
        step = resolve_step(_cfg(c4, a1, 0.05, 0.3, step=0.01))
    assert step == pytest.approx(0.005)
    assert "exceeds min delay/10" in caplog.text
    assert resolve_step(_cfg(c4, a1, 0.0, 0.0, step=0.01)) == 0.01


@pytest.mark.parametrize("step, horizon", [(0.0, 1.0), (-0.1, 1.0), (0.5, 0.1)])
def test_step_too_large(c4, a1, step, horizon):
    with pytest.raises(StepTooLarge):
        resolve_step(_cfg(c4, a1, 0.1, 0.1, step=step, horizon=horizon))


def test_non_finite_state_raises(c4, a1):
    x0 = (float("nan"),) + (0.0,) * 7
    with pytest.raises(NonFiniteState):
        simulate(_cfg(c4, a1, 0.1, 0.1, x0=x0, horizon=1.0, step=0.01))


def test_consensus_space_is_invariant(c4, a3):
    x0 = (1.5, -2.0) * 4
    traj = simulate(_cfg(c4, a3, 0.3, 1.1, x0=x0, horizon=10.0, step=0.01))
    assert np.max(traj.disagreement) < 1e-10


def test_times_are_uniform_and_thinned(c4, a1):
    traj = simulate(_cfg(c4, a1, 0.2, 0.2, horizon=2.0, step=0.01, record_stride=5))
    gaps = np.diff(traj.times)
    assert np.allclose(gaps, 0.05)
    assert traj.times[-1] == pytest.approx(2.0)
    assert np.all(traj.disagreement >= 0)


def test_delay_free_matches_matrix_exponential():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        pairs = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)] * (n > 2)
        g = build_graph(n, pairs)
        a12, a21 = rng.uniform(-1.5, 1.5, size=2)
        p = build_pattern([[1.0, a12], [a21, 1.0]])
        x0 = tuple(rng.uniform(-5, 5, size=2 * n))
        traj = simulate(SimConfig(graph=g, pattern=p, delays=DelayPair(0.0, 0.0), x0=x0, horizon=1.0, step=1e-3))
        exact = delay_free_solution(g, p, x0, 1.0)
        assert np.max(np.abs(traj.states[-1] - exact)) < 1e-6


def test_delay_free_converges_to_average(c4, a1):
    traj = simulate(_cfg(c4, a1, 0.0, 0.0, horizon=40.0, step=0.01))
    cls = traj.classification
    assert cls.kind == "Converged"
    expected = consensus_value(traj.states[0], 4, 2)
    assert np.allclose(cls.value, expected, atol=1e-5)


def test_equal_delays_inside_margin_converge(c4, a1):
    traj = simulate(_cfg(c4, a1, 0.2, 0.2, horizon=60.0, step=0.01))
    assert traj.classification.kind == "Converged"
    assert np.allclose(traj.final_agents(), consensus_value(traj.states[0], 4, 2), atol=1e-5)
    assert conservation_drift(traj) < 1e-6


def test_step_halving_consistency(c4, a1):
    coarse = simulate(_cfg(c4, a1, 0.2, 0.2, horizon=60.0, step=0.01))
    fine = simulate(_cfg(c4, a1, 0.2, 0.2, horizon=60.0, step=0.005))
    assert abs(coarse.disagreement[-1] - fine.disagreement[-1]) < 1e-6


def test_conservation_over_long_run(c4, a1):
    traj = simulate(_cfg(c4, a1, 0.1, 0.15, horizon=50.0, step=1e-3, record_stride=100))
    assert conservation_drift(traj) < 1e-6


def test_margin_oscillation_frequency(c4, a1):
    traj = simulate(_cfg(c4, a1, 0.23, 0.23, horizon=60.0, step=0.005, record_stride=10))
    assert traj.classification.kind == "Bounded"
    assert oscillation_frequency(traj) == pytest.approx(4.0 * (1.0 + math.sqrt(0.5)), abs=0.05)


def test_unit_modulus_pattern_stays_bounded(c4, a2):
    traj = simulate(_cfg(c4, a2, 0.0, 2.0, horizon=50.0, step=0.01))
    assert traj.classification.kind == "Bounded"


def test_unstable_pattern_aborts_as_diverged(c4, a3):
    traj = simulate(_cfg(c4, a3, 0.0, 0.0, horizon=30.0, step=0.01))
    assert traj.aborted
    assert traj.classification.kind == "Diverged"
    assert traj.classification.at_time == pytest.approx(traj.abort_time)
    assert traj.classification.at_time < 30.0


def test_aborted_run_keeps_uniform_samples(c4, a3):
    traj = simulate(_cfg(c4, a3, 0.0, 0.0, horizon=30.0, step=0.01, record_stride=7))
    assert traj.aborted
    assert np.allclose(np.diff(traj.times), traj.step)
    assert traj.times[-1] <= traj.abort_time < traj.times[-1] + traj.step
    assert traj.classification == Classification(kind="Diverged", at_time=traj.abort_time)


def test_linear_to_zero_history_changes_trajectory(c4, a1):
    const = simulate(_cfg(c4, a1, 0.2, 0.2, horizon=5.0, step=0.01))
    ramp = simulate(_cfg(c4, a1, 0.2, 0.2, horizon=5.0, step=0.01, history="linear-to-zero"))
    assert not np.allclose(const.states[-1], ramp.states[-1])
    assert conservation_drift(ramp) < 1e-6


def test_bad_record_stride(c4, a1):
    with pytest.raises(ConfigError):
        simulate(_cfg(c4, a1, 0.1, 0.1, horizon=1.0, step=0.01, record_stride=0))


def _synthetic(disagreement, aborted=False):
    dis = np.asarray(disagreement, dtype=float)
    times = np.arange(dis.size, dtype=float)
    states = np.zeros((dis.size, 2))
    return Trajectory(n=2, d=1, step=1.0, times=times, states=states, disagreement=dis, aborted=aborted,
                      abort_time=float(times[-1]) if aborted else None)


def test_classify_trajectory_synthetic():
    assert classify_trajectory(_synthetic([1.0, 0.1, 1e-8, 1e-9]), eps=1e-6, window=1.0).kind == "Converged"
    assert classify_trajectory(_synthetic([1.0, 0.5, 0.5, 0.5])).kind == "Bounded"
    grown = classify_trajectory(_synthetic([1.0, 10.0, 2000.0, 5000.0]))
    assert grown == Classification(kind="Diverged", at_time=2.0)
    assert classify_trajectory(_synthetic([1.0, 2.0], aborted=True)).kind == "Diverged"


@pytest.mark.slow
def test_delay_free_convergence_iff_hurwitz(c4):
    rng = np.random.default_rng(123)
    checked = 0
    while checked < 500:
        d = int(rng.choice([2, 3]))
        a = rng.uniform(-1.5, 1.5, size=(d, d))
        np.fill_diagonal(a, 1.0)
        p = build_pattern(a)
        if min(abs(z.real) for z in cross_spectrum(p).zeta) < 0.25:
            continue
        traj = simulate(SimConfig(graph=c4, pattern=p, delays=DelayPair(0.0, 0.0), horizon=50.0, step=0.01, seed=checked))
        expected = "Converged" if delay_free_consensus(p) else "Diverged"
        assert traj.classification.kind == expected
        checked += 1
