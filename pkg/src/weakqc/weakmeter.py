"""Qubit weak measurement of a computational-basis projector.

A meter qubit prepared in ``cos(theta)|0> + sin(theta)|1>`` is flipped by a
(multiply-)controlled NOT whose control condition is "system inside the
projector's subspace", then read in the Z basis. Outcome ``+`` is meter
``|0>``, outcome ``-`` is meter ``|1>``.

``p_target`` throughout is the system's probability mass inside the measured
subspace (``|beta|^2`` for a single qubit, the all-ones mass for the
multi-qubit gate, a prefix mass during bisection).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .qstate import PrefixProjector, PureState

__all__ = [
    "MeterConfig",
    "Outcome",
    "kraus_operators",
    "outcome_probabilities",
    "post_measurement_state",
    "projector_estimator_value",
    "projector_estimator_variance",
    "sample_outcome",
    "sample_outcomes",
    "z_estimator_value",
    "z_estimator_variance",
]

QUARTER_PI = math.pi / 4


class Outcome(IntEnum):
    PLUS = 1
    MINUS = -1

    @property
    def symbol(self) -> str:
        return "+" if self is Outcome.PLUS else "-"


class EstimatorUndefinedError(ValueError):
    """Raised when an estimator is requested from a meter that is switched off."""


@dataclass(frozen=True)
class MeterConfig:
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= QUARTER_PI + 1e-15:
            raise ValueError(f"theta must lie in [0, pi/4], got {self.theta}")

    @classmethod
    def from_strength(cls, strength: float) -> "MeterConfig":
        if not 0.0 <= strength <= 1.0:
            raise ValueError("strength must lie in [0, 1]")
        return cls(0.5 * math.acos(strength))

    @property
    def is_off(self) -> bool:
        return math.isclose(self.theta, QUARTER_PI, rel_tol=0.0, abs_tol=1e-15)

    @property
    def strength(self) -> float:
        """``cos^2 - sin^2`` of theta: 1 is projective, 0 is no measurement."""
        if self.is_off:
            return 0.0
        return math.cos(2.0 * self.theta)

    @property
    def cos2(self) -> float:
        return 0.5 * (1.0 + self.strength)

    @property
    def sin2(self) -> float:
        return 0.5 * (1.0 - self.strength)

    @property
    def worst_case_sigma(self) -> float:
        """Largest single-shot standard deviation of the projector estimator."""
        return 0.5 / self._require_strength()

    def _require_strength(self) -> float:
        s = self.strength
        if s <= 0.0:
            raise EstimatorUndefinedError(
                "estimators are undefined at theta = pi/4 (meter carries no information)"
            )
        return s


def _check_probability(p_target) -> None:
    p = np.asarray(p_target)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError(f"p_target must lie in [0, 1], got {p_target}")


def outcome_probabilities(p_target: float, config: MeterConfig) -> tuple[float, float]:
    """``(P(+), P(-))`` for a system with mass ``p_target`` in the measured subspace."""
    _check_probability(p_target)
    q = 1.0 - p_target
    p_plus = q * config.cos2 + p_target * config.sin2
    p_minus = q * config.sin2 + p_target * config.cos2
    return p_plus, p_minus


def sample_outcome(p_target: float, config: MeterConfig, rng: np.random.Generator) -> Outcome:
    p_plus, _ = outcome_probabilities(p_target, config)
    return Outcome.PLUS if rng.random() < p_plus else Outcome.MINUS


def sample_outcomes(
    p_target: float, config: MeterConfig, rng: np.random.Generator, size: int
) -> np.ndarray:
    """``size`` independent shots, each on a freshly prepared system, as an
    int8 array of +1/-1."""
    p_plus, _ = outcome_probabilities(p_target, config)
    return np.where(rng.random(size) < p_plus, 1, -1).astype(np.int8)


def z_estimator_value(outcome, config: MeterConfig):
    """``+-1/strength``; averages to ``<Z>`` on the measured qubit."""
    return np.sign(outcome) / config._require_strength()


def projector_estimator_value(outcome, config: MeterConfig, target: bool = False):
    """Single-shot projector estimate ``1/2 +- 1/(2 strength)``.

    With ``target=False`` (outcome ``+`` maps to the larger value) the mean is
    the mass *outside* the measured subspace, i.e. ``|alpha|^2`` for a single
    qubit. ``target=True`` swaps the two values so the mean is ``p_target``.
    """
    s = config._require_strength()
    sign = np.sign(outcome)
    if target:
        sign = -sign
    return 0.5 + sign / (2.0 * s)


def z_estimator_variance(p_target: float, config: MeterConfig) -> float:
    s = config._require_strength()
    _check_probability(p_target)
    mean = 1.0 - 2.0 * p_target
    return 1.0 / s**2 - mean**2


def projector_estimator_variance(p_target: float, config: MeterConfig) -> float:
    s = config._require_strength()
    _check_probability(p_target)
    mean = 1.0 - 2.0 * p_target
    return 1.0 / (4.0 * s**2) - mean**2 / 4.0


def kraus_operators(
    config: MeterConfig, projector: PrefixProjector
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of the two system update operators ``(K+, K-)``.

    Outcome ``+`` scales the subspace by ``sin(theta)`` and its complement by
    ``cos(theta)``; outcome ``-`` swaps the two factors.
    """
    inside = projector.diagonal()
    c, s = math.sqrt(config.cos2), math.sqrt(config.sin2)
    k_plus = c * (1.0 - inside) + s * inside
    k_minus = s * (1.0 - inside) + c * inside
    return k_plus, k_minus


def post_measurement_state(
    state: PureState,
    outcome: Outcome,
    config: MeterConfig,
    measured_projector: PrefixProjector,
) -> PureState:
    if state.num_qubits != measured_projector.num_qubits:
        raise ValueError("state and projector act on different registers")
    k_plus, k_minus = kraus_operators(config, measured_projector)
    k = k_plus if Outcome(outcome) is Outcome.PLUS else k_minus
    v = k * state.amplitudes
    norm2 = float(np.sum(np.abs(v) ** 2))
    if norm2 <= 1e-300:
        raise ValueError(f"outcome {Outcome(outcome).symbol} has zero probability")
    return PureState(state.num_qubits, v / math.sqrt(norm2))
