"""Bisection readout of the largest supported register value.

Each bit, most significant first, is one decision: does the prefix
"bits found so far, then 1" carry nonzero probability? The decision is made
from the mean of ``M`` weak projector samples against a threshold halfway
between "no mass" and the guaranteed mass floor ``s1``. ``M`` is sized so each
of the ``n`` decisions errs with probability at most ``epsilon / n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .orderfind import euler_phi, prime_probability_bound
from .qstate import DiagonalMixture, prefix_projector, projector_expectation
from .stats import erfc, erfc_inv
from .weakmeter import MeterConfig, projector_estimator_value, sample_outcomes

__all__ = [
    "BisectionResult",
    "BitDecision",
    "DecisionSpec",
    "SampleBudget",
    "error_probability",
    "overall_failure_bound",
    "plan_budget",
    "required_samples",
    "required_samples_real",
    "run_bisection",
    "sample_bound",
    "simulate_union_failures",
]


@dataclass(frozen=True)
class DecisionSpec:
    """Two-hypothesis mean test with a shared (worst-case) single-shot sigma."""

    signal_one: float
    worst_case_sigma: float
    signal_zero: float = 0.0

    def __post_init__(self):
        if self.worst_case_sigma <= 0:
            raise ValueError("worst_case_sigma must be positive")
        if self.signal_one == self.signal_zero:
            raise ValueError("the two signal levels must differ")

    @classmethod
    def for_meter(cls, config: MeterConfig, signal_one: float) -> "DecisionSpec":
        return cls(signal_one, config.worst_case_sigma)

    @classmethod
    def from_snr(cls, snr: float) -> "DecisionSpec":
        if snr <= 0:
            raise ValueError("snr must be positive")
        return cls(signal_one=snr, worst_case_sigma=1.0)

    @property
    def snr(self) -> float:
        return abs(self.signal_one - self.signal_zero) / self.worst_case_sigma

    @property
    def threshold(self) -> float:
        return 0.5 * (self.signal_zero + self.signal_one)


@dataclass(frozen=True)
class SampleBudget:
    total_error: float
    bits: int
    samples_per_bit: int

    @property
    def per_bit_error(self) -> float:
        return self.total_error / self.bits

    @property
    def total_samples(self) -> int:
        return self.bits * self.samples_per_bit


def _check_budget_args(epsilon: float, n: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if 2.0 * epsilon / n > 1.0:
        raise ValueError("2*epsilon/n must not exceed 1")


def required_samples_real(spec: DecisionSpec, epsilon: float, n: int) -> float:
    """``[2 sqrt(2) / SNR0 * erf_inv(1 - 2 epsilon / n)]^2`` before rounding.

    Evaluated as ``erfc_inv(2 epsilon / n)`` so very small per-bit errors keep
    their precision.
    """
    _check_budget_args(epsilon, n)
    q = 2.0 * epsilon / n
    x = 0.0 if q == 1.0 else erfc_inv(q)
    return (2.0 * math.sqrt(2.0) / spec.snr * x) ** 2


def error_probability(spec: DecisionSpec, M: float) -> float:
    """Per-decision error of the halfway threshold after ``M`` samples.

    ``(1 - erf(SNR0 sqrt(M) / 2 sqrt 2)) / 2``, i.e. the normal tail beyond half
    the signal gap measured in standard errors of the mean.
    """
    if M < 0:
        raise ValueError("M must be non-negative")
    return 0.5 * erfc(spec.snr * math.sqrt(M) / (2.0 * math.sqrt(2.0)))


def required_samples(spec: DecisionSpec, epsilon: float, n: int) -> int:
    """Smallest integer ``M >= 1`` whose per-decision error is at most ``epsilon/n``."""
    m_real = required_samples_real(spec, epsilon, n)
    M = max(1, math.ceil(m_real))
    target = epsilon / n
    # guard against erfc_inv rounding pushing an exact integer up by one
    if M > 1 and error_probability(spec, M - 1) <= target * (1 + 1e-12):
        M -= 1
    return M


def plan_budget(spec: DecisionSpec, epsilon: float, n: int) -> SampleBudget:
    return SampleBudget(epsilon, n, required_samples(spec, epsilon, n))


def sample_bound(snr: float, epsilon: float, n: int) -> float:
    """Upper bound ``(2 sqrt 2 / SNR0)^2 (ln n - ln(epsilon sqrt(pi)))^2`` on the
    real-valued sample count."""
    return (2.0 * math.sqrt(2.0) / snr) ** 2 * (math.log(n) - math.log(epsilon * math.sqrt(math.pi))) ** 2


def overall_failure_bound(per_bit_error: float, n: int) -> float:
    """``1 - (1 - eps')**n``, which never exceeds the union bound ``n eps'``."""
    if not 0.0 <= per_bit_error < 1.0:
        raise ValueError("per-bit error must lie in [0, 1)")
    exact = -math.expm1(n * math.log1p(-per_bit_error))
    assert exact <= n * per_bit_error + 1e-15
    return exact


def simulate_union_failures(
    per_bit_error: float, n: int, trials: int, rng: np.random.Generator
) -> float:
    """Fraction of ``trials`` runs in which at least one of ``n`` independent
    decisions fails."""
    fails = rng.random((trials, n)) < per_bit_error
    return float(np.mean(fails.any(axis=1)))


@dataclass(frozen=True)
class BitDecision:
    prefix: str
    samples: int
    sample_mean: float
    threshold: float
    decision: int

    def to_dict(self) -> dict:
        return {
            "prefix": self.prefix,
            "M": self.samples,
            "sample_mean": self.sample_mean,
            "threshold": self.threshold,
            "decision": self.decision,
        }


@dataclass(frozen=True)
class BisectionResult:
    value: int
    register_bits: int
    samples_per_bit: int
    signal_floor: float
    transcript: list[BitDecision] = field(default_factory=list)

    @property
    def bits(self) -> str:
        return format(self.value, f"0{self.register_bits}b")

    @property
    def total_samples(self) -> int:
        return self.register_bits * self.samples_per_bit

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bits": self.bits,
            "register_bits": self.register_bits,
            "samples_per_bit": self.samples_per_bit,
            "total_samples": self.total_samples,
            "signal_floor": self.signal_floor,
            "transcript": [d.to_dict() for d in self.transcript],
        }


def default_signal_floor(dist: DiagonalMixture) -> float:
    modulus = getattr(dist, "modulus", None)
    if modulus is None:
        raise ValueError("distribution has no modulus; pass signal_floor explicitly")
    return prime_probability_bound(modulus)


def totient_floor(r: int) -> float:
    """Exact mass at ``r`` in the ideal denominator law."""
    return euler_phi(r) / r


def run_bisection(
    dist: DiagonalMixture,
    config: MeterConfig,
    epsilon: float,
    rng: Optional[np.random.Generator] = None,
    signal_floor: Optional[float] = None,
    exact: bool = False,
) -> BisectionResult:
    """Read the largest value with mass above noise, one bit per decision.

    Each decision averages ``M`` projector-estimator samples. Every sample
    comes from a freshly prepared register, so back-action never builds up
    and ``dist`` fully determines the outcome law. ``exact=True`` swaps the
    sample mean for the true expectation, giving the noiseless reference run.
    A mean exactly on the threshold decides 0.
    """
    if config.is_off:
        raise ValueError("theta = pi/4 gives no information; readout impossible")
    if abs(float(np.sum(dist.probabilities)) - 1.0) > 1e-9:
        raise ValueError("distribution is not normalized")
    if not exact and rng is None:
        raise ValueError("sampling mode needs a random generator")
    s1 = default_signal_floor(dist) if signal_floor is None else float(signal_floor)
    if s1 <= 0:
        raise ValueError("signal floor must be positive")

    n = dist.num_qubits
    spec = DecisionSpec.for_meter(config, s1)
    M = required_samples(spec, epsilon, n)
    determined: list[int] = []
    transcript = []
    for _ in range(n):
        proj = prefix_projector(n, determined, 1)
        p = projector_expectation(dist, proj)
        if exact:
            mean = p
        else:
            outcomes = sample_outcomes(p, config, rng, M)
            mean = float(np.mean(projector_estimator_value(outcomes, config, target=True)))
        bit = 1 if mean > spec.threshold else 0
        determined.append(bit)
        transcript.append(BitDecision(proj.label(), M, mean, spec.threshold, bit))

    value = 0
    for b in determined:
        value = (value << 1) | b
    return BisectionResult(value, n, M, s1, transcript)
