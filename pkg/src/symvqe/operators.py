"""Hamiltonians and symmetry operators used in the experiments.

Pauli strings list one letter per qubit, index 0 being qubit 0 (the least
significant bit), so ``"XZ"`` is X on qubit 0 and Z on qubit 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ComplexMatrix, kron_all
from .simulator import PAULI


class OperatorError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    ops: str

    def __post_init__(self):
        if not self.ops or set(self.ops) - set("IXYZ"):
            raise OperatorError(f"invalid Pauli string {self.ops!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.ops)

    def dense(self) -> ComplexMatrix:
        # Kronecker order runs from the most significant qubit down.
        return kron_all(PAULI[c] for c in reversed(self.ops))


@dataclass(frozen=True)
class PauliSum:
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        terms = tuple((float(c), p) for c, p in self.terms)
        if len({p.n_qubits for _, p in terms}) > 1:
            raise OperatorError("all Pauli strings in a sum must act on the same register")
        object.__setattr__(self, "terms", terms)

    @property
    def n_qubits(self) -> int:
        return self.terms[0][1].n_qubits if self.terms else 0

    def __len__(self):
        return len(self.terms)


def pauli_term(n: int, coeff: float, placed: dict[int, str]) -> tuple[float, PauliString]:
    ops = ["I"] * n
    for q, c in placed.items():
        ops[q] = c
    return coeff, PauliString("".join(ops))


def pauli_dense(p: PauliSum) -> ComplexMatrix:
    if not p.terms:
        raise OperatorError("empty Pauli sum has no register size")
    dim = 2**p.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, string in p.terms:
        out += coeff * string.dense()
    return out


def build_xxz(n: int, J: float, K: float) -> PauliSum:
    """Open-boundary XXZ chain: sum over bonds of J(XX + YY) + K ZZ."""
    if n < 2:
        raise OperatorError("XXZ chain needs at least two sites")
    terms = []
    for i in range(n - 1):
        terms.append(pauli_term(n, J, {i: "X", i + 1: "X"}))
        terms.append(pauli_term(n, J, {i: "Y", i + 1: "Y"}))
        terms.append(pauli_term(n, K, {i: "Z", i + 1: "Z"}))
    return PauliSum(tuple(terms))


def _permutation_matrix(dest: np.ndarray) -> ComplexMatrix:
    dim = len(dest)
    m = np.zeros((dim, dim), dtype=complex)
    m[dest, np.arange(dim)] = 1.0
    return m


def mirror_labels(n: int) -> np.ndarray:
    """Basis label reached from each label by reversing its bit string."""
    labels = np.arange(2**n)
    out = np.zeros_like(labels)
    for q in range(n):
        out |= ((labels >> q) & 1) << (n - 1 - q)
    return out


def build_reflection(n: int) -> ComplexMatrix:
    """Chain reflection: product of SWAPs on mirror pairs (i, n-1-i)."""
    if n < 2 or n % 2:
        raise OperatorError("reflection operator is defined for even n >= 2")
    return _permutation_matrix(mirror_labels(n))


def build_rotation(n: int) -> ComplexMatrix:
    """Global spin flip, the product of X over every site."""
    if n < 1:
        raise OperatorError("rotation operator needs n >= 1")
    labels = np.arange(2**n)
    return _permutation_matrix(labels ^ (2**n - 1))


# Basis order |0110>, |0101>, |1010>, |1001> maps to labels 0..3.
H2_BASIS = ("0110", "0101", "1010", "1001")


def h2_hamiltonian() -> ComplexMatrix:
    """H2 in STO-3G at 0.725 Angstrom, restricted to the N=2, Sz=0 block."""
    return np.array(
        [
            [-1.06, 0.0, 0.0, 0.18],
            [0.0, -1.84, 0.18, 0.0],
            [0.0, 0.18, -0.23, 0.0],
            [0.18, 0.0, 0.0, -1.06],
        ],
        dtype=complex,
    )


def s2_operator() -> ComplexMatrix:
    """Total spin squared in the same four-state basis as :func:`h2_hamiltonian`."""
    return 0.5 * np.array(
        [
            [1.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 1.0],
        ],
        dtype=complex,
    )
