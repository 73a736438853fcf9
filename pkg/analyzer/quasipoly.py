from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from errors import ConfigError, DisconnectedGraph, NoConvergence
from graph_core import LaplacianSpectrum
from pattern import PatternSpectrum
from settings import get_settings
from stability import DelayPair

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
MERGE_TOL = 1e-6
CROSSING_TOL = 1e-8
AXIS_TOL = 1e-4
SCAN_STEPS = 2000
_GRID_SIGMA = 40
_GRID_OMEGA = 160


@dataclass(frozen=True)
class CharInstance:
    """One scalar factor s + λe^{-τ1 s} + λμe^{-τ2 s} of the network characteristic function."""

    lam: float
    mu: complex
    tau1: float
    tau2: float

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ConfigError("Characteristic instance needs lambda > 0", detail=f"lambda={self.lam!r}")
        if self.tau1 < 0 or self.tau2 < 0:
            raise ConfigError("Delays must be non-negative", detail=f"tau1={self.tau1!r}, tau2={self.tau2!r}")

    @property
    def radius(self) -> float:
        # r_ik = λ|1 + μ|
        return self.lam * abs(1.0 + self.mu)

    @property
    def omega_bound(self) -> float:
        return 1.1 * self.lam * (1.0 + abs(self.mu))

    def default_sigma_range(self) -> Tuple[float, float]:
        half = 2.0 * self.lam * (1.0 + abs(self.mu))
        return -half, half


@dataclass
class RootScanResult:
    crossings: List[float] = field(default_factory=list)
    rightmost_abscissa: Optional[float] = None
    converged: bool = True
    dropped: int = 0


def char_value(s, inst: CharInstance):
    """f(s) = s + λe^{-τ1 s} + λμe^{-τ2 s}; accepts scalars or numpy arrays."""
    return s + inst.lam * np.exp(-inst.tau1 * s) + inst.lam * inst.mu * np.exp(-inst.tau2 * s)


def _char_derivative(s, inst: CharInstance):
    return 1.0 - inst.tau1 * inst.lam * np.exp(-inst.tau1 * s) - inst.tau2 * inst.lam * inst.mu * np.exp(-inst.tau2 * s)


def _term_scale(s, inst: CharInstance):
    return (
        np.abs(s)
        + inst.lam * np.abs(np.exp(-inst.tau1 * s))
        + inst.lam * abs(inst.mu) * np.abs(np.exp(-inst.tau2 * s))
    )


def newton_refine(
    seeds: Sequence[complex],
    inst: CharInstance,
    *,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Damped Newton on every seed at once. Returns (roots, converged_mask).
    A seed converges when |f| < tol (relative to the size of its terms) or the
    step stalls at rounding level.
    """
    s = np.asarray(seeds, dtype=complex).copy()
    done = np.zeros(s.shape, dtype=bool)
    if s.size == 0:
        return s, done
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(max_iter):
            active = ~done
            if not active.any():
                break
            sa = s[active]
            fv = char_value(sa, inst)
            small = np.abs(fv) < tol * np.maximum(1.0, _term_scale(sa, inst))
            step = fv / _char_derivative(sa, inst)
            step = np.where(np.isfinite(step), step, 0.0)
            trial = sa - step
            worse = np.abs(char_value(trial, inst)) > np.abs(fv)
            damp = 1.0
            for _halving in range(8):
                if not worse.any():
                    break
                damp *= 0.5
                trial = np.where(worse, sa - damp * step, trial)
                worse = worse & (np.abs(char_value(trial, inst)) > np.abs(fv))
            stalled = np.abs(step) < 1e-13 * np.maximum(1.0, np.abs(sa))
            s[active] = np.where(small, sa, trial)
            idx = np.flatnonzero(active)
            done[idx[small | stalled]] = True
        final = char_value(s, inst)
        ok = done & np.isfinite(s) & (np.abs(final) < 1e3 * tol * np.maximum(1.0, _term_scale(s, inst)))
    return s, ok


def _merge_roots(roots: Sequence[complex], tol: float = MERGE_TOL) -> List[complex]:
    merged: List[complex] = []
    for r in sorted(roots, key=lambda z: (-z.real, z.imag)):
        if all(abs(r - m) > tol for m in merged):
            merged.append(complex(r))
    return merged


def scan_magnitude(inst: CharInstance, omega_max: float, steps: int = SCAN_STEPS) -> Tuple[np.ndarray, np.ndarray]:
    """|f(jω)| over ω ∈ [-omega_max, omega_max] with step omega_max/steps."""
    omega = np.linspace(-omega_max, omega_max, 2 * steps + 1)
    return omega, np.abs(char_value(1j * omega, inst))


def imag_axis_crossings(inst: CharInstance, omega_max: float, *, axis_tol: float = AXIS_TOL) -> RootScanResult:
    """
    Frequencies ω where a root sits on the imaginary axis: a refined root counts
    when |f(jω)| vanishes or its real part is within axis_tol of zero.
    """
    if not omega_max > 0:
        raise ConfigError("omega_max must be positive", detail=f"omega_max={omega_max!r}")
    omega, mag = scan_magnitude(inst, omega_max)
    interior = (mag[1:-1] <= mag[:-2]) & (mag[1:-1] <= mag[2:])
    candidates = omega[1:-1][interior]

    result = RootScanResult()
    if candidates.size == 0:
        return result
    roots, ok = newton_refine(1j * candidates, inst)
    found: List[float] = []
    for cand, root, good in zip(candidates, roots, ok):
        if not good:
            result.dropped += 1
            logger.warning("root refinement stalled near omega=%.6g; candidate dropped", cand)
            continue
        w = float(root.imag)
        if abs(w) > omega_max * (1.0 + 1e-9):
            continue
        if abs(root.real) <= axis_tol or abs(char_value(1j * w, inst)) < CROSSING_TOL:
            found.append(w)
    merged: List[float] = []
    for w in sorted(found):
        if not merged or abs(w - merged[-1]) > MERGE_TOL:
            merged.append(w)
    result.crossings = merged
    result.converged = result.dropped == 0
    return result


def _cheb(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** np.arange(n + 1)
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    d = d - np.diag(d.sum(axis=1))
    return d, x


def _lagrange_row(x: np.ndarray, y: float) -> np.ndarray:
    """Values of every Chebyshev-node Lagrange basis polynomial at y (barycentric form)."""
    n = x.size - 1
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    hit = np.isclose(y, x, rtol=0.0, atol=1e-14)
    if hit.any():
        row = np.zeros(n + 1)
        row[np.argmax(hit)] = 1.0
        return row
    terms = w / (y - x)
    return terms / terms.sum()


def spectral_seeds(inst: CharInstance, nodes: Optional[int] = None) -> np.ndarray:
    """
    Approximate characteristic roots as eigenvalues of a Chebyshev collocation
    of the delay equation's solution operator generator on [-max τ, 0].
    """
    horizon = max(inst.tau1, inst.tau2)
    if horizon <= 0:
        return np.array([-inst.lam * (1.0 + inst.mu)], dtype=complex)
    if nodes is None:
        nodes = int(min(160, max(24, math.ceil(inst.omega_bound * horizon) + 24)))
    d, x = _cheb(nodes)
    gen = np.zeros((nodes + 1, nodes + 1), dtype=complex)
    gen[1:, :] = (2.0 / horizon) * d[1:, :]
    for coef, tau in ((-inst.lam, inst.tau1), (-inst.lam * inst.mu, inst.tau2)):
        gen[0, :] += coef * _lagrange_row(x, 1.0 - 2.0 * tau / horizon)
    try:
        return np.linalg.eigvals(gen)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence("Collocation eigenproblem failed", detail=str(exc)) from exc


def _grid_seeds(inst: CharInstance, sigma_range: Tuple[float, float]) -> np.ndarray:
    sigma = np.linspace(sigma_range[0], sigma_range[1], _GRID_SIGMA)
    omega = np.linspace(-inst.omega_bound, inst.omega_bound, _GRID_OMEGA)
    grid = sigma[:, None] + 1j * omega[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        mag = np.abs(char_value(grid, inst))
    mag = np.where(np.isfinite(mag), mag, np.inf)
    minima = (mag == ndimage.minimum_filter(mag, size=3, mode="nearest")) & np.isfinite(mag)
    return grid[minima]


def characteristic_roots(
    inst: CharInstance,
    sigma_range: Optional[Tuple[float, float]] = None,
) -> List[complex]:
    """Roots found inside the search rectangle, rightmost first, merged within MERGE_TOL."""
    lo, hi = sigma_range or inst.default_sigma_range()
    if lo >= hi:
        raise ConfigError("sigma_range must be ordered", detail=f"sigma_range=({lo}, {hi})")
    if inst.tau1 == 0 and inst.tau2 == 0:
        root = complex(-inst.lam * (1.0 + inst.mu))
        return [root] if lo <= root.real <= hi else []

    spectral = spectral_seeds(inst)
    keep = (spectral.real >= lo - 1.0) & (np.abs(spectral) <= 10.0 * inst.omega_bound + abs(lo))
    seeds = np.concatenate([spectral[keep], _grid_seeds(inst, (lo, hi))])
    roots, ok = newton_refine(seeds, inst)
    if seeds.size and not ok.any():
        raise NoConvergence("No root candidate converged", detail=f"lambda={inst.lam}, mu={inst.mu}")
    inside = [complex(r) for r, good in zip(roots, ok) if good and lo <= r.real <= hi]
    return _merge_roots(inside)


def rightmost_abscissa(inst: CharInstance, sigma_range: Optional[Tuple[float, float]] = None) -> float:
    """Largest real part among roots in the rectangle; -inf when none was found there."""
    roots = characteristic_roots(inst, sigma_range)
    if not roots:
        return -math.inf
    return max(r.real for r in roots)


@dataclass(frozen=True)
class ModeAbscissa:
    lam: float
    mu: complex
    abscissa: float


def _unique_lambdas(spectrum: LaplacianSpectrum, tol: float) -> List[float]:
    out: List[float] = []
    for lam in spectrum.nonzero():
        if all(abs(lam - seen) > tol for seen in out):
            out.append(lam)
    return out


def network_abscissae(
    spectrum: LaplacianSpectrum,
    s: PatternSpectrum,
    delays: DelayPair,
    *,
    workers: Optional[int] = None,
) -> List[ModeAbscissa]:
    """Rightmost abscissa of every (λ_i, μ_k) factor, i ≥ 2; repeated λ evaluated once."""
    settings = get_settings()
    if not spectrum.connected():
        raise DisconnectedGraph("Oracle needs a connected graph", detail=f"lambda2={spectrum.lambda2:.3g}")
    pairs = [(lam, mu) for lam in _unique_lambdas(spectrum, settings.zero_tol) for mu in s.mu]

    def _one(pair: Tuple[float, complex]) -> ModeAbscissa:
        lam, mu = pair
        inst = CharInstance(lam=lam, mu=mu, tau1=delays.tau1, tau2=delays.tau2)
        return ModeAbscissa(lam=lam, mu=mu, abscissa=rightmost_abscissa(inst))

    workers = settings.workers if workers is None else workers
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_one, pairs))
    return [_one(pair) for pair in pairs]


def network_stable_oracle(
    spectrum: LaplacianSpectrum,
    s: PatternSpectrum,
    delays: DelayPair,
    *,
    workers: Optional[int] = None,
) -> bool:
    tol = get_settings().oracle_tol
    modes = network_abscissae(spectrum, s, delays, workers=workers)
    return all(m.abscissa < -tol for m in modes)


def oracle_summary(modes: Sequence[ModeAbscissa], tol: float) -> Dict[str, object]:
    worst = max(modes, key=lambda m: m.abscissa)
    return {
        "stable": all(m.abscissa < -tol for m in modes),
        "rightmost_abscissa": worst.abscissa,
        "critical_lambda": worst.lam,
        "critical_mu": [worst.mu.real, worst.mu.imag],
        "modes": [
            {"lambda": m.lam, "mu": [m.mu.real, m.mu.imag], "rightmost_abscissa": m.abscissa} for m in modes
        ],
    }
