from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from errors import ConfigError, DisconnectedGraph, HypothesisViolated
from graph_core import LaplacianSpectrum
from pattern import InteractionPattern, PatternSpectrum, build_pattern, cross_spectrum
from settings import get_settings

Verdict = Literal["ConsensusGuaranteed", "UnstableGuaranteed", "MarginalBoundary", "OutsideTheory"]

# Justification tags, one per closed-form result.
DELAY_FREE = "delay-free-hurwitz"
INTRA_DELAY_FREE = "intra-delay-free"
CROSS_DELAY_FREE = "cross-delay-free"
EQUAL_DELAY = "equal-delay-margin"
EQUAL_DELAY_MODE = "equal-delay-mode-margin"
TWO_DELAY = "two-delay-margin"
TWO_LAYER = "two-layer-corollary"
NO_CLAIM = "no-claim"

MARGINAL_PATTERN_NOTE = "marginal pattern; simulate"


@dataclass(frozen=True)
class DelayPair:
    tau1: float
    tau2: float

    def __post_init__(self) -> None:
        for name in ("tau1", "tau2"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ConfigError("Delays must be finite and non-negative", detail=f"{name}={val!r}")

    @property
    def max_delay(self) -> float:
        return max(self.tau1, self.tau2)


class MarginReport(BaseModel):
    tau_max: Optional[float] = None
    tau_equal_exact: Optional[float] = None
    tau_max_over_sqrt2: Optional[float] = None
    tau_prime_max: Optional[float] = None
    tau_intra_only: Optional[float] = None
    crossing_frequency: Optional[float] = None
    hurwitz_delay_free: bool
    mu_max_abs: float
    lambda_max: float
    tau1: Optional[float] = None
    tau2: Optional[float] = None
    verdict: Optional[Verdict] = None
    justification: Optional[str] = None
    note: Optional[str] = None

    # ---- two-layer specialisation ----
    product_a12_a21: Optional[float] = None
    tau1_zero_consensus: Optional[bool] = None
    corollary_tau_max: Optional[float] = None
    corollary_two_delay_bound: Optional[float] = None


def _within_unit_disk(s: PatternSpectrum, tol: float) -> bool:
    return s.mu_max_abs < 1.0 - tol


def _require_unit_disk(s: PatternSpectrum, tol: float) -> None:
    if not _within_unit_disk(s, tol):
        raise HypothesisViolated(
            "Margin formulas need every |mu_k| < 1",
            detail=f"max|mu|={s.mu_max_abs:.6g}",
        )


def _require_positive(lambda_max: float) -> None:
    if not lambda_max > 0:
        raise HypothesisViolated("lambda_max must be positive (connected graph)", detail=f"lambda_max={lambda_max!r}")


def hurwitz_from_spectrum(s: PatternSpectrum, tol: float = 1e-12) -> bool:
    # eigenvalues of -A are -1 - mu_k
    return all(z.real > tol for z in s.zeta)


def delay_free_consensus(p: InteractionPattern, tol: float = 1e-12) -> bool:
    eigs = np.linalg.eigvals(-p.matrix())
    return bool(np.all(eigs.real < -tol))


def margin_equal_delays(lambda_max: float, s: PatternSpectrum, *, tol: Optional[float] = None) -> float:
    tol = get_settings().margin_tol if tol is None else tol
    _require_positive(lambda_max)
    _require_unit_disk(s, tol)
    return s.c / (lambda_max * s.zeta_max)


def margin_equal_delays_exact(lambda_max: float, s: PatternSpectrum, *, tol: Optional[float] = None) -> float:
    """
    First equal-delay crossing min_k c_k / (λ_max |ζ_k|). Equals τ_max when the
    smallest c_k and the largest |ζ_k| belong to the same mode (always for d = 2).
    """
    tol = get_settings().margin_tol if tol is None else tol
    _require_positive(lambda_max)
    _require_unit_disk(s, tol)
    return s.crossing_ratio / lambda_max


def margin_unequal_delays(lambda_max: float, s: PatternSpectrum, *, tol: Optional[float] = None) -> Tuple[float, float]:
    tau_max = margin_equal_delays(lambda_max, s, tol=tol)
    tau_prime = s.c / (lambda_max * s.zeta_prime_max)
    return tau_max / math.sqrt(2.0), tau_prime


def margin_intra_only(
    lambda_max: float,
    s: PatternSpectrum,
    *,
    tol: Optional[float] = None,
    require_nonnegative_real: bool = True,
) -> float:
    tol = get_settings().margin_tol if tol is None else tol
    _require_positive(lambda_max)
    _require_unit_disk(s, tol)
    negative = [a for a in s.a_parts if a < -tol]
    if negative and require_nonnegative_real:
        raise HypothesisViolated("Cross-delay-free bound needs every Re(mu_k) >= 0", detail=f"min Re(mu)={min(negative):.6g}")
    return math.pi / (2.0 * lambda_max * (1.0 + s.b_max))


def mode_margins(spectrum: LaplacianSpectrum, s: PatternSpectrum) -> List[Dict[str, float]]:
    """Equal-delay margin c_k / (λ_i |ζ_k|) of every (λ_i, μ_k) mode; the minimum is τ_max."""
    rows: List[Dict[str, float]] = []
    for i, lam in enumerate(spectrum.values):
        if i == 0:
            continue
        for k, (z, ck) in enumerate(zip(s.zeta, s.c_k)):
            rows.append({"i": i + 1, "k": k + 1, "lambda": lam, "margin": ck / (lam * abs(z))})
    return rows


def _base_report(spectrum: LaplacianSpectrum, s: PatternSpectrum, tol: float) -> MarginReport:
    lam = spectrum.lambda_max
    report = MarginReport(
        hurwitz_delay_free=hurwitz_from_spectrum(s),
        mu_max_abs=s.mu_max_abs,
        lambda_max=lam,
    )
    if not _within_unit_disk(s, tol) or lam <= 0:
        return report
    report.tau_max = margin_equal_delays(lam, s, tol=tol)
    report.tau_max_over_sqrt2, report.tau_prime_max = margin_unequal_delays(lam, s, tol=tol)
    report.tau_equal_exact = margin_equal_delays_exact(lam, s, tol=tol)
    report.crossing_frequency = lam * abs(s.zeta[s.binding_mode()])
    try:
        report.tau_intra_only = margin_intra_only(lam, s, tol=tol)
    except HypothesisViolated:
        report.tau_intra_only = None
    return report


def classify(
    spectrum: LaplacianSpectrum,
    s: PatternSpectrum,
    delays: DelayPair,
    *,
    tol: Optional[float] = None,
) -> MarginReport:
    """
    Decide the regime of (graph, pattern, τ1, τ2). Exact (iff) results are
    tried before sufficient ones; OutsideTheory is a "no claim" answer.
    """
    tol = get_settings().margin_tol if tol is None else tol
    if not spectrum.connected():
        raise DisconnectedGraph("Consensus analysis needs a connected graph", detail=f"lambda2={spectrum.lambda2:.3g}")

    report = _base_report(spectrum, s, tol)
    report.tau1, report.tau2 = delays.tau1, delays.tau2
    tau1, tau2 = delays.tau1, delays.tau2
    inside = _within_unit_disk(s, tol)
    tau1_zero = tau1 <= tol
    tau2_zero = tau2 <= tol

    def _set(verdict: Verdict, tag: str, note: Optional[str] = None) -> MarginReport:
        report.verdict = verdict
        report.justification = tag
        report.note = note
        return report

    if s.mu_max_abs >= 1.0 + tol and not report.hurwitz_delay_free:
        return _set("UnstableGuaranteed", DELAY_FREE, "-A is not Hurwitz")
    if tau1_zero and tau2_zero:
        if report.hurwitz_delay_free:
            return _set("ConsensusGuaranteed", DELAY_FREE)
        return _set("UnstableGuaranteed", DELAY_FREE, "-A is not Hurwitz")
    if inside and tau1_zero:
        return _set("ConsensusGuaranteed", INTRA_DELAY_FREE)
    if inside and tau2_zero and report.tau_intra_only is not None and tau1 < report.tau_intra_only:
        return _set("ConsensusGuaranteed", CROSS_DELAY_FREE)
    if inside and abs(tau1 - tau2) <= tol:
        tau = 0.5 * (tau1 + tau2)
        if abs(tau - report.tau_equal_exact) <= tol:
            return _set("MarginalBoundary", EQUAL_DELAY, "purely imaginary roots at the margin")
        if tau < report.tau_max:
            return _set("ConsensusGuaranteed", EQUAL_DELAY)
        if tau < report.tau_equal_exact:
            return _set("ConsensusGuaranteed", EQUAL_DELAY_MODE, "beyond tau_max but before the first per-mode crossing")
        return _set("UnstableGuaranteed", EQUAL_DELAY)
    if inside and tau1 <= tau2 < max(report.tau_max_over_sqrt2, report.tau_prime_max):
        return _set("ConsensusGuaranteed", TWO_DELAY)

    note = None
    if abs(s.mu_max_abs - 1.0) < tol:
        note = MARGINAL_PATTERN_NOTE
    return _set("OutsideTheory", NO_CLAIM, note)


def two_layer_margins(a12: float, a21: float, lambda_max: float, *, tol: Optional[float] = None) -> MarginReport:
    """
    Two-layer specialisation: μ = ±√(a12·a21). Cross-checks the shared formula
    against the general path (τ_max when the product is ≥ 0, the cross-delay-free
    bound when it is negative).
    """
    tol = get_settings().margin_tol if tol is None else tol
    _require_positive(lambda_max)
    product = a12 * a21
    if abs(product) >= 1.0:
        raise HypothesisViolated("Two-layer conditions need |a12*a21| < 1", detail=f"a12*a21={product:.6g}")

    s = cross_spectrum(build_pattern([[1.0, a12], [a21, 1.0]]))
    bound = math.pi / (2.0 * lambda_max * (1.0 + math.sqrt(abs(product))))

    report = MarginReport(
        hurwitz_delay_free=hurwitz_from_spectrum(s),
        mu_max_abs=s.mu_max_abs,
        lambda_max=lambda_max,
        product_a12_a21=product,
        tau1_zero_consensus=True,
        corollary_tau_max=bound,
    )
    report.tau_max = margin_equal_delays(lambda_max, s, tol=tol)
    report.tau_equal_exact = margin_equal_delays_exact(lambda_max, s, tol=tol)
    report.tau_max_over_sqrt2, report.tau_prime_max = margin_unequal_delays(lambda_max, s, tol=tol)
    report.crossing_frequency = lambda_max * s.zeta_max
    try:
        report.tau_intra_only = margin_intra_only(lambda_max, s, tol=tol)
    except HypothesisViolated:
        report.tau_intra_only = None

    general = report.tau_max if product >= 0 else report.tau_intra_only
    if general is None or abs(general - bound) > 1e-9:
        raise HypothesisViolated(
            "Two-layer bound disagrees with the general formula",
            detail=f"two-layer={bound!r}, general={general!r}",
        )
    if -1.0 < product < 0.0:
        report.corollary_two_delay_bound = bound
        report.note = "two-delay bound as stated for negative a12*a21; the general two-delay bound is max(tau_max/sqrt2, tau_prime_max)"
    report.justification = TWO_LAYER
    return report
