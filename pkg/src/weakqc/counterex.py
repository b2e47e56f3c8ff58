"""Two readouts where ensemble averaging stops being efficient.

Satisfiability: one satisfying assignment out of ``2**n`` leaves a signal of
``2**-n``, so the samples needed to detect it double with every input bit.

Local meters: estimating a product observable ``A1...An`` from ``n``
independent zero-mean meters of variance ``sigma**2`` carries a
``sigma**(2n)`` noise floor in the variance of the meter product.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .readout import DecisionSpec, required_samples, required_samples_real
from .streams import substreams

__all__ = [
    "LocalMeterModel",
    "MonteCarloVariance",
    "SatInstance",
    "local_correlation_variance",
    "local_meter_monte_carlo",
    "local_meter_table",
    "nonlocal_vs_local_overhead",
    "sat_required_samples",
    "sat_scaling_table",
    "sat_signal_noise",
    "variance_expansion_terms",
]


@dataclass(frozen=True)
class SatInstance:
    input_bits: int
    satisfying_count: int

    def __post_init__(self):
        if self.input_bits < 1:
            raise ValueError("input_bits must be positive")
        if not 0 <= self.satisfying_count <= 1 << self.input_bits:
            raise ValueError("satisfying_count must lie in [0, 2**n]")

    @classmethod
    def from_truth_table(cls, table: Sequence[bool]) -> "SatInstance":
        """Count satisfying rows of an explicit truth table (n <= 20)."""
        size = len(table)
        n = size.bit_length() - 1
        if n < 1 or size != 1 << n:
            raise ValueError("truth table length must be a power of two >= 2")
        if n > 20:
            raise ValueError("explicit truth tables are limited to 20 inputs")
        return cls(n, int(np.count_nonzero(np.asarray(table, dtype=bool))))

    @property
    def signal(self) -> float:
        """Expected value of the output-register projector, ``k / 2**n``."""
        return self.satisfying_count / (1 << self.input_bits)


def sat_signal_noise(instance: SatInstance, M: int) -> tuple[float, float, float]:
    """``(signal, noise, snr)`` of the output-register mean after ``M`` shots."""
    if M < 1:
        raise ValueError("M must be at least 1")
    s = instance.signal
    noise = math.sqrt(s * (1.0 - s)) / math.sqrt(M)
    if s == 0.0:
        snr = 0.0
    elif noise == 0.0:
        snr = math.inf
    else:
        snr = s / noise
    return s, noise, snr


def _sat_decision(instance: SatInstance) -> Optional[DecisionSpec]:
    # unsatisfiable vs. the alternative with at least one satisfying row
    alt = SatInstance(instance.input_bits, max(instance.satisfying_count, 1))
    _, sigma, _ = sat_signal_noise(alt, 1)
    if sigma == 0.0:
        return None
    return DecisionSpec(signal_one=alt.signal, worst_case_sigma=sigma)


def sat_required_samples(instance: SatInstance, epsilon: float) -> int:
    """Shots needed to tell "unsatisfiable" from the instance at error ``epsilon``."""
    spec = _sat_decision(instance)
    if spec is None:
        return 1  # noiseless signal, one shot decides
    return required_samples(spec, epsilon, 1)


def sat_scaling_table(n_values: Sequence[int], epsilon: float) -> list[dict]:
    rows = []
    for n in n_values:
        inst = SatInstance(n, 1)
        spec = _sat_decision(inst)
        rows.append({
            "n": n,
            "signal": inst.signal,
            "snr0": spec.snr,
            "M_required": sat_required_samples(inst, epsilon),
        })
    return rows


@dataclass(frozen=True, eq=False)
class LocalMeterModel:
    """``n`` Gaussian meters, each shifted by ``gamma * A_k``.

    ``outcomes`` lists the joint values (rows of +-1) of the system
    observables and ``probabilities`` their weights.
    """

    meter_count: int
    meter_sigma: float
    coupling: float
    outcomes: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        a = np.array(self.outcomes, dtype=float)
        p = np.array(self.probabilities, dtype=float).ravel()
        if self.meter_count < 1:
            raise ValueError("meter_count must be positive")
        if self.meter_sigma <= 0 or self.coupling < 0:
            raise ValueError("meter_sigma must be positive and coupling non-negative")
        if a.ndim != 2 or a.shape[1] != self.meter_count or a.shape[0] != p.size:
            raise ValueError("outcomes must be a (K, n) table matching probabilities")
        if not np.all(np.abs(a) == 1.0):
            raise ValueError("system observables must be +-1 valued")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be a distribution")
        object.__setattr__(self, "outcomes", a)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def independent_uniform(cls, n: int, sigma: float, gamma: float) -> "LocalMeterModel":
        rows = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
        return cls(n, sigma, gamma, rows, np.full(len(rows), 1.0 / len(rows)))

    @classmethod
    def fixed(cls, values: Sequence[int], sigma: float, gamma: float) -> "LocalMeterModel":
        """System in a joint eigenstate: every ``A_k`` takes a definite value."""
        return cls(len(values), sigma, gamma, np.array([values], dtype=float), np.ones(1))

    def product_moments(self) -> tuple[float, float]:
        """Mean and variance of ``A1 A2 ... An`` under the joint law."""
        prod = np.prod(self.outcomes, axis=1)
        mean = float(np.dot(self.probabilities, prod))
        second = float(np.dot(self.probabilities, prod**2))
        return mean, second - mean**2


def variance_expansion_terms(model: LocalMeterModel) -> list[float]:
    """Terms of the meter-product variance, grouped by power of ``gamma**2``.

    Term ``j < n`` is ``gamma^(2j) sigma^(2(n-j)) sum_{|S|=j} <prod_{k in S} A_k^2>``
    over subsets ``S`` of distinct meters; the last term is
    ``gamma^(2n) var(A1...An)``.
    """
    n, sigma2, gamma2 = model.meter_count, model.meter_sigma**2, model.coupling**2
    a2 = model.outcomes**2
    terms = []
    for j in range(n):
        moment = 0.0
        for subset in itertools.combinations(range(n), j):
            cols = a2[:, list(subset)]
            moment += float(np.dot(model.probabilities, np.prod(cols, axis=1)))
        terms.append(gamma2**j * sigma2 ** (n - j) * moment)
    _, var_a = model.product_moments()
    terms.append(gamma2**n * var_a)
    return terms


def local_correlation_variance(model: LocalMeterModel) -> float:
    return math.fsum(variance_expansion_terms(model))


@dataclass(frozen=True)
class MonteCarloVariance:
    variance: float
    standard_error: float
    mean: float
    samples: int


def local_meter_monte_carlo(
    model: LocalMeterModel, M: int, seed, chunks: int = 8
) -> MonteCarloVariance:
    """Sample variance of ``prod_k (X_k + gamma A_k)`` over ``M`` runs.

    Draws are split over ``chunks`` independent substreams of ``seed`` and
    concatenated in order, so the result is fixed by ``(seed, chunks)``.
    ``M >= 1e5`` keeps the variance estimate stable for ``n <= 4``.
    """
    if M < 2:
        raise ValueError("need at least two samples for a variance")
    sizes = [M // chunks + (1 if i < M % chunks else 0) for i in range(chunks)]
    y = np.empty(M)
    start = 0
    for size, rng in zip(sizes, substreams(seed, chunks)):
        rows = rng.choice(len(model.probabilities), size=size, p=model.probabilities)
        a = model.outcomes[rows]
        x = rng.normal(0.0, model.meter_sigma, size=(size, model.meter_count))
        y[start:start + size] = np.prod(x + model.coupling * a, axis=1)
        start += size
    mean = float(np.mean(y))
    dev = y - mean
    m2 = float(np.mean(dev**2))
    m4 = float(np.mean(dev**4))
    var = m2 * M / (M - 1)
    se = math.sqrt(max(m4 - m2 * m2, 0.0) / M)
    return MonteCarloVariance(var, se, mean, M)


def local_meter_table(
    n_values: Sequence[int], sigma: float, gamma: float, M: int, seed: int
) -> list[dict]:
    rows = []
    for n, stream_seed in zip(n_values, np.random.SeedSequence(seed).spawn(len(n_values))):
        model = LocalMeterModel.independent_uniform(n, sigma, gamma)
        closed = local_correlation_variance(model)
        mc = local_meter_monte_carlo(model, M, stream_seed)
        rows.append({
            "n": n,
            "sigma": sigma,
            "gamma": gamma,
            "closed_form": closed,
            "empirical": mc.variance,
            "standard_error": mc.standard_error,
            "z_score": (mc.variance - closed) / mc.standard_error if mc.standard_error > 0 else 0.0,
        })
    return rows


def nonlocal_vs_local_overhead(n: int, sigma: float, gamma: float, epsilon: float) -> float:
    """Ratio of samples needed with ``n`` local meters versus one non-local meter.

    Both read a unit shift in ``<A1...An>`` with the system contribution at
    its worst case (uniform independent +-1 observables). The local estimate
    divides the meter product by ``gamma**n``. The non-local meter couples
    once to the product observable.
    """
    if n < 1 or sigma <= 0 or gamma <= 0:
        raise ValueError("need n >= 1, sigma > 0, gamma > 0")
    local = LocalMeterModel.independent_uniform(n, sigma, gamma)
    local_sigma = math.sqrt(local_correlation_variance(local)) / gamma**n
    nonlocal_ = LocalMeterModel.independent_uniform(1, sigma, gamma)
    nonlocal_sigma = math.sqrt(local_correlation_variance(nonlocal_)) / gamma
    m_local = required_samples_real(DecisionSpec(1.0, local_sigma), epsilon, 1)
    m_nonlocal = required_samples_real(DecisionSpec(1.0, nonlocal_sigma), epsilon, 1)
    return m_local / m_nonlocal
