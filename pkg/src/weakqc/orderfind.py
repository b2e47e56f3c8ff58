"""Exact output distributions of the order-finding circuit.

The phase register is never measured. Continued fractions run as a reversible
map on its basis states, and the numerator is traced out. What is left is a
diagonal distribution over the denominator register, and its largest
supported value is the order. Everything here is computed in closed form.
:func:`full_statevector_oracle` redoes the whole circuit on a statevector for
small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .qstate import DiagonalMixture

__all__ = [
    "DenominatorDistribution",
    "OrderInstance",
    "continued_fraction_denominator",
    "denominator_distribution",
    "euler_phi",
    "find_order",
    "full_statevector_oracle",
    "ideal_denominator_distribution",
    "phase_outcome_distribution",
    "prime_probability_bound",
    "prime_probability_bound_bits",
]


def _check_base(x: int, N: int) -> None:
    if N < 3:
        raise ValueError(f"modulus must be at least 3, got N={N}")
    if not 1 < x < N:
        raise ValueError(f"base must satisfy 1 < x < N, got x={x}, N={N}")
    if math.gcd(x, N) != 1:
        raise ValueError(f"gcd({x}, {N}) = {math.gcd(x, N)}; x has no order mod N")


def find_order(x: int, N: int) -> int:
    """Least ``r >= 1`` with ``x**r % N == 1``, by repeated multiplication."""
    _check_base(x, N)
    r, y = 1, x % N
    while y != 1:
        y = (y * x) % N
        r += 1
    return r


def euler_phi(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def default_phase_bits(N: int) -> int:
    return 2 * (N - 1).bit_length() + 1


@dataclass(frozen=True)
class OrderInstance:
    x: int
    N: int
    phase_bits: Optional[int] = None
    order: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "order", find_order(self.x, self.N))
        if self.phase_bits is None:
            object.__setattr__(self, "phase_bits", default_phase_bits(self.N))
        elif self.phase_bits < 1:
            raise ValueError("phase_bits must be positive")

    @property
    def register_bits(self) -> int:
        """Bits needed for any denominator below N."""
        return (self.N - 1).bit_length()


@dataclass(frozen=True, eq=False)
class DenominatorDistribution(DiagonalMixture):
    """Probability of each value of the denominator register.

    ``modulus`` is set when the distribution came out of a concrete
    ``(x, N)`` run; it selects the default decision floor for readout.
    """

    modulus: Optional[int] = None

    @property
    def register_bits(self) -> int:
        return self.num_qubits

    def max_support(self, floor: float = 0.0) -> int:
        """Largest value whose mass exceeds ``floor``."""
        idx = np.flatnonzero(self.probabilities > floor)
        if idx.size == 0:
            raise ValueError(f"no value has mass above {floor}")
        return int(idx[-1])

    def rows(self, include_zero: bool = False) -> list[tuple[int, float]]:
        p = self.probabilities
        idx = range(p.size) if include_zero else np.flatnonzero(p)
        return [(int(i), float(p[i])) for i in idx]


def _dirichlet_power(c: int, step_num: np.ndarray, T: int) -> np.ndarray:
    """``|sum_{j<c} exp(2 pi i j step_num / T)|^2`` for integer ``step_num``.

    Angles are reduced modulo ``T`` in integer arithmetic before any floating
    point, so exact-resonance terms come out as ``c**2`` exactly.
    """
    num = step_num % T
    out = np.full(num.shape, float(c * c))
    nz = num != 0
    top = np.sin(np.pi * ((c * num[nz]) % T) / T) ** 2
    out[nz] = top / np.sin(np.pi * num[nz] / T) ** 2
    return out


def phase_outcome_distribution(instance: OrderInstance) -> np.ndarray:
    """Probability of each ``t``-bit phase-register outcome ``m``.

    Equal to the eigenphase mixture ``(1/r) sum_s |(1/T) sum_k e^{2 pi i k
    (s/r - m/T)}|^2``. It is evaluated through the work-register basis
    instead: control values ``k`` sharing ``k mod r`` form one block, and
    blocks have only two distinct lengths. That makes the cost O(T), not O(rT).
    """
    r = instance.order
    T = 1 << instance.phase_bits
    q, rem = divmod(T, r)
    m = np.arange(T, dtype=np.int64)
    step = (r * m) % T
    probs = (r - rem) * _dirichlet_power(q, step, T)
    if rem:
        probs = probs + rem * _dirichlet_power(q + 1, step, T)
    return probs / float(T) ** 2


def continued_fraction_denominator(m: int, t: int, N: int) -> tuple[int, int]:
    """Last convergent ``(s', r')`` of ``m / 2**t`` with ``r' < N``."""
    T = 1 << t
    if not 0 <= m < T:
        raise ValueError(f"m={m} outside [0, 2**{t})")
    p, q = m, T
    h1, h2 = 1, 0  # numerators h_{n-1}, h_{n-2}
    k1, k2 = 0, 1  # denominators
    best = (0, 1)
    while q:
        a = p // q
        h, k = a * h1 + h2, a * k1 + k2
        if k >= N:
            break
        best = (h, k)
        h1, h2, k1, k2 = h, h1, k, k1
        p, q = q, p - a * q
    return best


def _cf_denominators(t: int, N: int) -> np.ndarray:
    """Vectorized denominator of :func:`continued_fraction_denominator` for all m."""
    T = 1 << t
    p = np.arange(T, dtype=np.int64)
    q = np.full(T, T, dtype=np.int64)
    k1 = np.zeros(T, dtype=np.int64)
    k2 = np.ones(T, dtype=np.int64)
    best = np.ones(T, dtype=np.int64)
    active = np.ones(T, dtype=bool)
    while active.any():
        a = np.zeros(T, dtype=np.int64)
        a[active] = p[active] // q[active]
        k = a * k1 + k2
        take = active & (k < N)
        best[take] = k[take]
        active = take
        k2 = np.where(take, k1, k2)
        k1 = np.where(take, k, k1)
        rem = p - a * q
        p = np.where(take, q, p)
        q = np.where(take, rem, q)
        active &= q != 0
    return best


def _to_distribution(values: np.ndarray, probs: np.ndarray, bits: int, modulus) -> DenominatorDistribution:
    mass = np.bincount(values, weights=probs, minlength=1 << bits)
    return DenominatorDistribution(bits, mass, modulus=modulus)


def denominator_distribution(instance: OrderInstance) -> DenominatorDistribution:
    """Phase outcomes pushed through continued fractions, numerator traced out."""
    probs = phase_outcome_distribution(instance)
    dens = _cf_denominators(instance.phase_bits, instance.N)
    return _to_distribution(dens, probs, instance.register_bits, instance.N)


def ideal_denominator_distribution(r: int, register_bits: int) -> DenominatorDistribution:
    """Denominator law for exact phases ``s/r`` with ``s`` uniform on ``[0, r)``.

    Value ``d`` receives ``#{s : r/gcd(s, r) = d} / r``, i.e. ``phi(d)/r`` on
    the divisors of ``r``.
    """
    if r < 1:
        raise ValueError("order must be positive")
    if r >= 1 << register_bits:
        raise ValueError(f"order {r} does not fit in {register_bits} bits")
    counts = np.zeros(1 << register_bits)
    for s in range(r):
        counts[r // math.gcd(s, r)] += 1
    return DenominatorDistribution(register_bits, counts / r)


def prime_probability_bound(N: int) -> float:
    """``1 / (2 ln N)``, the floor on the mass sitting at the true order."""
    if N < 3:
        raise ValueError("N must be at least 3")
    return 1.0 / (2.0 * math.log(N))


def prime_probability_bound_bits(N: int) -> float:
    """Bit-count form ``1 / (2 n ln 2)`` with ``n = ceil(log2 N)``."""
    if N < 3:
        raise ValueError("N must be at least 3")
    n = (N - 1).bit_length()
    return 1.0 / (2.0 * n * math.log(2.0))


def full_statevector_oracle(instance: OrderInstance, max_qubits: int = 20) -> DenominatorDistribution:
    """Simulate the circuit end to end on an explicit statevector.

    Phase register (t qubits) in uniform superposition, work register in
    ``|1>``; controlled ``U^(2^j)`` applied qubit by qubit as basis
    permutations; inverse Fourier transform as a dense matrix; then the
    continued-fraction map and partial trace over everything but the
    denominator.
    """
    t, N, x = instance.phase_bits, instance.N, instance.x
    w = N.bit_length()
    if t + w > max_qubits:
        raise ValueError(f"{t + w} qubits exceeds the oracle limit of {max_qubits}")
    T, W = 1 << t, 1 << w
    psi = np.zeros((T, W), dtype=complex)
    psi[:, 1] = 1.0 / math.sqrt(T)

    ys = np.arange(W)
    for j in range(t):
        mult = pow(x, 1 << j, N)
        perm = ys.copy()
        perm[:N] = (ys[:N] * mult) % N  # |y> -> |x^(2^j) y mod N>, identity above N
        # phase qubit j is bit j (weight 2^j) of the control value k
        ctrl = ((np.arange(T) >> j) & 1).astype(bool)
        block = psi[ctrl]
        moved = np.zeros_like(block)
        moved[:, perm] = block
        psi[ctrl] = moved

    k = np.arange(T)
    inv_qft = np.exp(-2j * np.pi * np.outer(k, k) / T) / math.sqrt(T)
    psi = inv_qft @ psi

    p_m = np.sum(np.abs(psi) ** 2, axis=1)
    dens = np.array([continued_fraction_denominator(m, t, N)[1] for m in range(T)])
    return _to_distribution(dens, p_m, instance.register_bits, N)
