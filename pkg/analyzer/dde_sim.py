from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse

from errors import ConfigError, NonFiniteState, StepTooLarge
from graph_core import Graph, laplacian
from pattern import InteractionPattern, cross_matrix
from settings import get_settings
from stability import DelayPair

logger = logging.getLogger(__name__)

HistoryMode = Literal["constant", "linear-to-zero"]
TrajectoryKind = Literal["Converged", "Bounded", "Diverged"]

X0_RANGE = 5.0
GROWTH_FACTOR = 1e3


@dataclass(frozen=True)
class SimConfig:
    graph: Graph
    pattern: InteractionPattern
    delays: DelayPair
    x0: Optional[Tuple[float, ...]] = None
    horizon: float = 30.0
    step: float = 1e-3
    history: HistoryMode = "constant"
    seed: Optional[int] = None
    record_stride: int = 1
    divergence_threshold: float = 1e6

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def d(self) -> int:
        return self.pattern.d


@dataclass(frozen=True)
class Classification:
    kind: TrajectoryKind
    value: Optional[Tuple[float, ...]] = None
    at_time: Optional[float] = None


@dataclass
class Trajectory:
    n: int
    d: int
    step: float
    times: np.ndarray
    states: np.ndarray
    disagreement: np.ndarray
    aborted: bool = False
    abort_time: Optional[float] = None
    classification: Optional[Classification] = field(default=None)

    def layer_sums(self) -> np.ndarray:
        return self.states.reshape(len(self.times), self.n, self.d).sum(axis=1)

    def final_agents(self) -> np.ndarray:
        return self.states[-1].reshape(self.n, self.d)


def system_matrices(graph: Graph, pattern: InteractionPattern) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """(L ⊗ I_d, L ⊗ A_cross): intra-layer and cross-layer coupling of the stacked state."""
    lap = sparse.csr_matrix(laplacian(graph))
    intra = sparse.kron(lap, sparse.identity(pattern.d), format="csr")
    cross = sparse.kron(lap, sparse.csr_matrix(cross_matrix(pattern)), format="csr")
    return intra, cross


def initial_state(cfg: SimConfig) -> np.ndarray:
    size = cfg.n * cfg.d
    if cfg.x0 is not None:
        x0 = np.asarray(cfg.x0, dtype=float)
        if x0.shape != (size,):
            raise ConfigError("x0 must hold n*d values", detail=f"expected {size}, got {x0.size}")
        return x0
    rng = np.random.default_rng(cfg.seed)
    return rng.uniform(-X0_RANGE, X0_RANGE, size)


def resolve_step(cfg: SimConfig) -> float:
    if not cfg.step > 0:
        raise StepTooLarge("Step must be positive", detail=f"step={cfg.step!r}")
    if cfg.horizon < cfg.step:
        raise StepTooLarge("Horizon shorter than one step", detail=f"horizon={cfg.horizon!r}, step={cfg.step!r}")
    positive = [tau for tau in (cfg.delays.tau1, cfg.delays.tau2) if tau > 0]
    if positive and cfg.step > min(positive) / 10.0:
        shrunk = min(positive) / 10.0
        logger.warning("step %.3g exceeds min delay/10; using %.3g", cfg.step, shrunk)
        return shrunk
    return cfg.step


def disagreement_norm(state: np.ndarray, n: int, d: int) -> float:
    agents = np.asarray(state, dtype=float).reshape(n, d)
    return float(np.linalg.norm(agents - agents.mean(axis=0)))


def _disagreement_series(states: np.ndarray, n: int, d: int) -> np.ndarray:
    agents = states.reshape(states.shape[0], n, d)
    dev = agents - agents.mean(axis=1, keepdims=True)
    return np.sqrt((dev**2).sum(axis=(1, 2)))


def consensus_value(x0: Sequence[float], n: int, d: int) -> np.ndarray:
    return np.asarray(x0, dtype=float).reshape(n, d).mean(axis=0)


class _HistoryBuffer:
    """Ring buffer of past states on the uniform step grid, read by linear interpolation."""

    def __init__(self, x0: np.ndarray, step: float, max_delay: float, mode: HistoryMode) -> None:
        self.step = step
        self.capacity = int(math.ceil(max_delay / step)) + 3
        self.rows = np.empty((self.capacity, x0.size))
        for j in range(-self.capacity + 1, 1):
            t = j * step
            if mode == "linear-to-zero" and max_delay > 0:
                weight = max(0.0, 1.0 + t / max_delay)
            else:
                weight = 1.0
            self.rows[j % self.capacity] = weight * x0

    def store(self, k: int, state: np.ndarray) -> None:
        self.rows[k % self.capacity] = state

    def lookup(self, position: float) -> np.ndarray:
        j0 = math.floor(position)
        frac = position - j0
        lo = self.rows[j0 % self.capacity]
        if frac == 0.0:
            return lo
        return (1.0 - frac) * lo + frac * self.rows[(j0 + 1) % self.capacity]


def simulate(cfg: SimConfig, *, settings=None) -> Trajectory:
    """
    Fixed-step RK4 on ẋ(t) = -(L⊗I)x(t-τ1) - (L⊗A_cross)x(t-τ2) with the
    history held in a ring buffer. Aborts once any |state| exceeds the
    divergence threshold.
    """
    settings = settings or get_settings()
    if cfg.record_stride < 1:
        raise ConfigError("record_stride must be >= 1", detail=f"record_stride={cfg.record_stride}")
    h = resolve_step(cfg)
    n, d = cfg.n, cfg.d
    intra, cross = system_matrices(cfg.graph, cfg.pattern)
    x0 = initial_state(cfg)
    tau1, tau2 = cfg.delays.tau1, cfg.delays.tau2
    buf = _HistoryBuffer(x0, h, cfg.delays.max_delay, cfg.history)

    nsteps = int(round(cfg.horizon / h))
    stride = cfg.record_stride
    times = [0.0]
    states = [x0.copy()]

    def _delayed(k: int, c: float, tau: float, current: np.ndarray) -> np.ndarray:
        if tau == 0:
            return current
        return buf.lookup(k + c - tau / h)

    def _rhs(k: int, c: float, current: np.ndarray) -> np.ndarray:
        return -(intra @ _delayed(k, c, tau1, current)) - (cross @ _delayed(k, c, tau2, current))

    y = x0.copy()
    aborted = False
    abort_time = None
    for k in range(nsteps):
        k1 = _rhs(k, 0.0, y)
        k2 = _rhs(k, 0.5, y + 0.5 * h * k1)
        k3 = _rhs(k, 0.5, y + 0.5 * h * k2)
        k4 = _rhs(k, 1.0, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (k + 1) * h
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(t)
        buf.store(k + 1, y)
        on_stride = (k + 1) % stride == 0
        if on_stride:
            times.append(t)
            states.append(y.copy())
        if np.max(np.abs(y)) > cfg.divergence_threshold:
            # samples stay on the stride grid; abort_time marks the stop
            aborted, abort_time = True, t
            break

    state_arr = np.vstack(states)
    traj = Trajectory(
        n=n,
        d=d,
        step=h * stride,
        times=np.asarray(times),
        states=state_arr,
        disagreement=_disagreement_series(state_arr, n, d),
        aborted=aborted,
        abort_time=abort_time,
    )
    traj.classification = classify_trajectory(traj, settings.convergence_eps, settings.convergence_window)
    return traj


def classify_trajectory(traj: Trajectory, eps: float = 1e-6, window: float = 1.0) -> Classification:
    dis = traj.disagreement
    times = traj.times
    initial = float(dis[0])
    final = float(dis[-1])
    if traj.aborted:
        return Classification(kind="Diverged", at_time=traj.abort_time)
    if final > GROWTH_FACTOR * max(initial, eps):
        over = np.flatnonzero(dis > GROWTH_FACTOR * max(initial, eps))
        return Classification(kind="Diverged", at_time=float(times[over[0]]))

    tail = times >= times[-1] - window
    if times[-1] >= window and np.all(dis[tail] < eps):
        above = np.flatnonzero(dis >= eps)
        settled = float(times[above[-1] + 1]) if above.size else float(times[0])
        value = traj.final_agents().mean(axis=0)
        return Classification(kind="Converged", value=tuple(float(v) for v in value), at_time=settled)
    return Classification(kind="Bounded")


def conservation_drift(traj: Trajectory) -> float:
    sums = traj.layer_sums()
    return float(np.max(np.abs(sums - sums[0])))


def oscillation_frequency(traj: Trajectory, tail_fraction: float = 0.5) -> Optional[float]:
    """
    Dominant angular frequency of the disagreement component over the trailing
    part of the run, from upward zero crossings of the most active coordinate.
    """
    count = len(traj.times)
    start = int(count * (1.0 - tail_fraction))
    agents = traj.states[start:].reshape(count - start, traj.n, traj.d)
    dev = (agents - agents.mean(axis=1, keepdims=True)).reshape(count - start, -1)
    signal = dev[:, int(np.argmax(dev.var(axis=0)))]
    signal = signal - signal.mean()
    t = traj.times[start:]
    up = np.flatnonzero((signal[:-1] < 0) & (signal[1:] >= 0))
    if up.size < 3:
        return None
    frac = -signal[up] / (signal[up + 1] - signal[up])
    crossings = t[up] + frac * (t[up + 1] - t[up])
    return float(2.0 * math.pi * (crossings.size - 1) / (crossings[-1] - crossings[0]))


def delay_free_solution(graph: Graph, pattern: InteractionPattern, x0: Sequence[float], t: float) -> np.ndarray:
    """x(t) = exp(-(L⊗A)t) x0, the τ1 = τ2 = 0 reference solution."""
    system = np.kron(laplacian(graph), pattern.matrix())
    return linalg.expm(-system * t) @ np.asarray(x0, dtype=float)