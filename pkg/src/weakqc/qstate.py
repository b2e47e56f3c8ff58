"""Qubit registers and computational-basis projectors.

Basis index ``i`` of an ``n``-qubit register is read MSB-first: qubit 0 is the
most significant bit of ``i``. Every observable the readout needs is diagonal
in this basis, so a register's measurement statistics are fully carried by its
basis-probability vector (:class:`DiagonalMixture`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "DiagonalMixture",
    "PrefixProjector",
    "PureState",
    "all_ones_projector",
    "multi_controlled_gate_count",
    "prefix_projector",
    "projector_expectation",
    "relabel_target_to_all_ones",
]

NORM_ATOL = 1e-9


def _check_length(num_qubits: int, length: int) -> None:
    if num_qubits < 1:
        raise ValueError("num_qubits must be positive")
    if length != 1 << num_qubits:
        raise ValueError(
            f"expected {1 << num_qubits} entries for {num_qubits} qubits, got {length}"
        )


@dataclass(frozen=True, eq=False)
class PureState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        _check_length(self.num_qubits, amps.size)
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector) -> "PureState":
        """Normalize an arbitrary nonzero vector into a state."""
        v = np.asarray(vector, dtype=complex).ravel()
        n = int(v.size).bit_length() - 1
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero vector has no direction")
        return cls(n, v / norm)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "PureState":
        v = np.zeros(1 << num_qubits, dtype=complex)
        v[index] = 1.0
        return cls(num_qubits, v)

    @classmethod
    def uniform(cls, num_qubits: int) -> "PureState":
        dim = 1 << num_qubits
        return cls(num_qubits, np.full(dim, 1 / np.sqrt(dim), dtype=complex))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_mixture(self) -> "DiagonalMixture":
        return DiagonalMixture(self.num_qubits, self.probabilities)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DiagonalMixture:
    num_qubits: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float).ravel()
        _check_length(self.num_qubits, p.size)
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(float(np.sum(p)) - 1.0) > NORM_ATOL:
            raise ValueError(f"probabilities sum to {np.sum(p)}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_mass(cls, num_qubits: int, mass: dict[int, float]) -> "DiagonalMixture":
        p = np.zeros(1 << num_qubits)
        for value, prob in mass.items():
            p[value] += prob
        return cls(num_qubits, p)

    @property
    def mass(self) -> dict[int, float]:
        return {int(i): float(self.probabilities[i]) for i in np.flatnonzero(self.probabilities)}

    def density_matrix(self) -> np.ndarray:
        return np.diag(self.probabilities).astype(complex)


State = Union[PureState, DiagonalMixture]


@dataclass(frozen=True)
class PrefixProjector:
    """Projector fixing the leading ``len(prefix)`` qubits to ``prefix``.

    The remaining qubits are left free, so the projector has rank
    ``2**(num_qubits - len(prefix))`` and covers one contiguous block of basis
    indices.
    """

    num_qubits: int
    prefix: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.prefix)
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        if len(bits) > self.num_qubits:
            raise ValueError(
                f"prefix of length {len(bits)} does not fit {self.num_qubits} qubits"
            )
        if any(b not in (0, 1) for b in bits):
            raise ValueError("prefix bits must be 0 or 1")
        object.__setattr__(self, "prefix", bits)

    @property
    def fixed_bits(self) -> list[tuple[int, int]]:
        return list(enumerate(self.prefix))

    @property
    def free_qubits(self) -> int:
        return self.num_qubits - len(self.prefix)

    @property
    def rank(self) -> int:
        return 1 << self.free_qubits

    @property
    def index_range(self) -> range:
        """Basis indices inside the projector's subspace."""
        lead = 0
        for b in self.prefix:
            lead = (lead << 1) | b
        lo = lead << self.free_qubits
        return range(lo, lo + self.rank)

    def label(self) -> str:
        return "".join(map(str, self.prefix)) + "#" * self.free_qubits

    def diagonal(self) -> np.ndarray:
        d = np.zeros(1 << self.num_qubits)
        r = self.index_range
        d[r.start:r.stop] = 1.0
        return d

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())


def all_ones_projector(num_qubits: int) -> PrefixProjector:
    """Rank-one projector onto ``|11...1>``; its complement is the
    orthogonal projector fed by the multiply-controlled NOT's inactive branch."""
    return PrefixProjector(num_qubits, (1,) * num_qubits)


def prefix_projector(num_qubits: int, determined_bits, next_bit: int) -> PrefixProjector:
    determined = tuple(determined_bits)
    if len(determined) >= num_qubits:
        raise ValueError(
            f"{len(determined)} determined bits leave no qubit to test in a "
            f"{num_qubits}-qubit register"
        )
    return PrefixProjector(num_qubits, determined + (int(next_bit),))


def projector_expectation(state: State, proj: PrefixProjector) -> float:
    """Probability mass of ``state`` inside the projector's subspace."""
    if state.num_qubits != proj.num_qubits:
        raise ValueError(
            f"state has {state.num_qubits} qubits but projector acts on {proj.num_qubits}"
        )
    r = proj.index_range
    return float(np.sum(state.probabilities[r.start:r.stop]))


def relabel_target_to_all_ones(state: State, target_basis_index: int) -> State:
    """Apply X to every qubit that is 0 in ``target_basis_index``.

    The target basis state lands on ``|11...1>``. Applying the same relabeling
    twice is the identity.
    """
    n = state.num_qubits
    dim = 1 << n
    if not 0 <= target_basis_index < dim:
        raise ValueError(f"target index {target_basis_index} outside [0, {dim})")
    flip = ~target_basis_index & (dim - 1)
    perm = np.arange(dim) ^ flip
    if isinstance(state, PureState):
        return PureState(n, state.amplitudes[perm])
    return DiagonalMixture(n, state.probabilities[perm])


def multi_controlled_gate_count(num_controls: int) -> int:
    """Singly-controlled gate count reported for an ``num_controls``-control NOT.

    Quadratic in the number of controls with unit constant; a cost figure,
    no decomposition is synthesized.
    """
    if num_controls < 1:
        raise ValueError("need at least one control")
    return num_controls * num_controls
