"""Error functions, normal CDF, confidence intervals and ensemble means.

``erf`` and ``erfc`` come straight from :mod:`math`; ``erf_inv`` and
``erfc_inv`` are solved here from a closed-form starting guess refined with
Halley steps, which is enough to round-trip ``erf(erf_inv(y))`` to ~1e-15 over
the open interval. ``erfc_inv`` takes the complement directly so tiny tail
probabilities keep full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EnsembleEstimate",
    "confidence_interval_bound",
    "confidence_interval_half_width",
    "confidence_interval_width",
    "ensemble_mean",
    "erf",
    "erf_inv",
    "erfc",
    "erfc_inv",
    "normal_cdf",
]

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

erf = math.erf
erfc = math.erfc


def _initial_guess(a: float, q: float) -> float:
    # Giles' single-precision approximation; only used as a Halley seed.
    # ``a`` is in [0, 1) and ``q = 1 - a`` is supplied exactly by the caller.
    w = -math.log(q * (1.0 + a))
    if w > 30.0:
        # beyond the fitted range; invert erfc(x) ~ exp(-x^2) / (x sqrt(pi))
        x = math.sqrt(w)
        for _ in range(3):
            x = math.sqrt(-math.log(q * math.sqrt(math.pi) * x))
        return x
    if w < 5.0:
        w -= 2.5
        p = 2.81022636e-08
        for c in (3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
                  -0.00125372503, -0.00417768164, 0.246640727, 1.50140941):
            p = c + p * w
    else:
        w = math.sqrt(w) - 3.0
        p = -0.000200214257
        for c in (0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
                  -0.0076224613, 0.00943887047, 1.00167406, 2.83297682):
            p = c + p * w
    return p * a


def _solve(a: float, q: float) -> float:
    """Non-negative ``x`` with ``erf(x) = a``, where ``q = 1 - a`` exactly."""
    x = _initial_guess(a, q)
    if a <= 0.5:
        for _ in range(4):
            f = erf(x) - a
            if f == 0.0:
                break
            step = f / (_TWO_OVER_SQRT_PI * math.exp(-x * x))
            x -= step / (1.0 + x * step)
        return x
    # Tail: Newton on log(erfc(x)) - log(q), which stays well scaled even
    # when erfc(x) and its derivative are far below machine epsilon.
    log_q = math.log(q)
    for _ in range(12):
        c = erfc(x)
        if c == 0.0:
            x *= 0.9
            continue
        fp = _TWO_OVER_SQRT_PI * math.exp(-x * x)
        if fp == 0.0:
            x *= 0.9
            continue
        step = (math.log(c) - log_q) * c / fp
        x += step
        if abs(step) <= 2e-16 * x:
            break
    return x


def erf_inv(y: float) -> float:
    """Inverse of the error function on the open interval (-1, 1)."""
    y = float(y)
    if not -1.0 < y < 1.0:
        raise ValueError(f"erf_inv is defined on (-1, 1), got {y!r}")
    if y == 0.0:
        return 0.0
    a = abs(y)
    return math.copysign(_solve(a, 1.0 - a), y)


def erfc_inv(q: float) -> float:
    """Inverse of the complementary error function on (0, 2).

    Unlike ``erf_inv(1 - q)`` this never forms ``1 - q`` for small ``q``, so
    arguments far below machine epsilon are inverted accurately.
    """
    q = float(q)
    if not 0.0 < q < 2.0:
        raise ValueError(f"erfc_inv is defined on (0, 2), got {q!r}")
    if q == 1.0:
        return 0.0
    if q < 1.0:
        return _solve(1.0 - q, q)
    return -_solve(q - 1.0, 2.0 - q)


def normal_cdf(x: float) -> float:
    """Standard normal CDF, ``(1 + erf(x / sqrt 2)) / 2``."""
    return 0.5 * erfc(-x / math.sqrt(2.0))


def _check_interval_args(sigma: float, M: int, epsilon: float) -> None:
    if M < 1:
        raise ValueError("M must be at least 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if sigma <= 0:
        raise ValueError("sigma must be positive")


def confidence_interval_half_width(sigma: float, M: int, epsilon: float) -> float:
    _check_interval_args(sigma, M, epsilon)
    return math.sqrt(2.0) * sigma / math.sqrt(M) * erf_inv(1.0 - epsilon)


def confidence_interval_width(sigma: float, M: int, epsilon: float) -> float:
    """Full width ``2 sqrt(2) sigma/sqrt(M) erf_inv(1 - epsilon)`` of the
    symmetric interval holding the sample mean with probability ``1 - epsilon``
    under the normal approximation."""
    return 2.0 * confidence_interval_half_width(sigma, M, epsilon)


def confidence_interval_bound(M: int, epsilon: float, strength: float) -> float:
    """``erf_inv(1 - epsilon) / (sqrt(2M) * strength)``.

    Equals :func:`confidence_interval_half_width` evaluated at the worst-case
    single-shot deviation ``sigma = 1/(2*strength)`` of the projector estimator.
    """
    if strength <= 0:
        raise ValueError("strength must be positive")
    _check_interval_args(1.0, M, epsilon)
    return erf_inv(1.0 - epsilon) / (math.sqrt(2.0 * M) * strength)


@dataclass(frozen=True)
class EnsembleEstimate:
    mean: float
    sample_count: int
    worst_case_sigma: float
    epsilon: float = 0.05

    @property
    def half_width(self) -> float:
        return confidence_interval_half_width(
            self.worst_case_sigma, self.sample_count, self.epsilon
        )

    @property
    def interval(self) -> tuple[float, float]:
        h = self.half_width
        return self.mean - h, self.mean + h


def ensemble_mean(
    samples,
    worst_case_sigma: float,
    epsilon: float = 0.05,
    weights=None,
) -> EnsembleEstimate:
    """Average estimator samples and attach the configured worst-case sigma.

    ``weights`` turns the average into an exact expectation over a finite
    outcome law (each sample value paired with its probability); the reported
    sample count is then the number of distinct values.
    """
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("cannot average an empty sample set")
    if weights is None:
        mean = float(np.mean(values))
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape != values.shape:
            raise ValueError("weights must match samples in length")
        mean = math.fsum(w * values) / math.fsum(w)
    return EnsembleEstimate(mean, int(values.size), float(worst_case_sigma), epsilon)
