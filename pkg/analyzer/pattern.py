from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from errors import BadDimension, EigenFailure, NonUnitDiagonal

_SORT_DIGITS = 12


@dataclass(frozen=True)
class InteractionPattern:
    """
    The d×d weight A shared by every edge. Row/column p is layer p; the
    diagonal weights intra-layer coupling and is fixed to 1.
    """

    a: Tuple[Tuple[float, ...], ...]

    @property
    def d(self) -> int:
        return len(self.a)

    def matrix(self) -> np.ndarray:
        return np.array(self.a, dtype=float)

    def rows(self) -> List[List[float]]:
        return [list(row) for row in self.a]


@dataclass(frozen=True)
class PatternSpectrum:
    mu: Tuple[complex, ...]
    zeta: Tuple[complex, ...]
    alpha: Tuple[float, ...]
    c_k: Tuple[float, ...]
    c: float
    zeta_max: float
    zeta_prime_max: float
    b_max: float
    mu_max_abs: float

    @property
    def a_parts(self) -> Tuple[float, ...]:
        return tuple(m.real for m in self.mu)

    def binding_mode(self) -> int:
        """Index k minimising c_k / |ζ_k|, the first mode to reach the imaginary axis under equal delays."""
        ratios = [ck / abs(z) if abs(z) > 0 else math.inf for ck, z in zip(self.c_k, self.zeta)]
        return int(np.argmin(ratios))

    @property
    def crossing_ratio(self) -> float:
        k = self.binding_mode()
        return self.c_k[k] / abs(self.zeta[k])


def build_pattern(a: Sequence[Sequence[float]], *, tol: float = 1e-12) -> InteractionPattern:
    try:
        mat = np.array(a, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadDimension("Pattern must be a numeric square matrix", detail=str(exc)) from exc
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise BadDimension("Pattern must be square", detail=f"shape={mat.shape}")
    if mat.shape[0] < 2:
        raise BadDimension("Pattern needs at least 2 layers", detail=f"d={mat.shape[0]}")
    if not np.all(np.isfinite(mat)):
        raise BadDimension("Pattern entries must be finite")
    for p in range(mat.shape[0]):
        if abs(mat[p, p] - 1.0) > tol:
            raise NonUnitDiagonal(p, float(mat[p, p]))
    return InteractionPattern(a=tuple(tuple(float(v) for v in row) for row in mat))


def cross_matrix(p: InteractionPattern) -> np.ndarray:
    mat = p.matrix()
    np.fill_diagonal(mat, 0.0)
    return mat


def closed_form_cross_eigenvalues(a12: float, a21: float) -> Tuple[complex, complex]:
    """μ = ±√(a12·a21) for d = 2; pure imaginary when the product is negative."""
    root = cmath.sqrt(complex(a12 * a21, 0.0))
    return _sorted_eigs([-root, root])


def _sorted_eigs(values: Sequence[complex]) -> Tuple[complex, ...]:
    return tuple(
        sorted(
            (complex(v) for v in values),
            key=lambda z: (round(z.real, _SORT_DIGITS), round(z.imag, _SORT_DIGITS)),
        )
    )


def _eigvals(mat: np.ndarray) -> Tuple[complex, ...]:
    try:
        values = np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure("General eigensolver failed", detail=str(exc)) from exc
    return _sorted_eigs(values)


def angular_margin(alpha: float) -> float:
    return min(abs(-math.pi / 2 + alpha), abs(math.pi / 2 + alpha))


def spectrum_from_mu(mu: Sequence[complex]) -> PatternSpectrum:
    mu = _sorted_eigs(mu)
    zeta = tuple(1.0 + m for m in mu)
    alpha = tuple(cmath.phase(z) for z in zeta)
    c_k = tuple(angular_margin(al) for al in alpha)
    return PatternSpectrum(
        mu=mu,
        zeta=zeta,
        alpha=alpha,
        c_k=c_k,
        c=min(c_k),
        zeta_max=max(abs(z) for z in zeta),
        zeta_prime_max=max(1.0 + abs(m.real) + abs(m.imag) for m in mu),
        b_max=max(abs(m.imag) for m in mu),
        mu_max_abs=max(abs(m) for m in mu),
    )


def cross_spectrum(p: InteractionPattern) -> PatternSpectrum:
    return spectrum_from_mu(_eigvals(cross_matrix(p)))


def pattern_eigenvalues(p: InteractionPattern) -> Tuple[complex, ...]:
    """Eigenvalues of A itself; under unit diagonal they are 1 + μ_k."""
    return _eigvals(p.matrix())


def gershgorin_bound(p: InteractionPattern) -> bool:
    """‖A_cross‖∞ < 1, a sufficient test for every |μ_k| < 1."""
    row_sums = np.abs(cross_matrix(p)).sum(axis=1)
    return bool(row_sums.max() < 1.0)
