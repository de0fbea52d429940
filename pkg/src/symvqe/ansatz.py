"""Parameterized circuits: the layered RY/RX + CNOT block and the k-dim subspace ansatz.

The subspace ansatz keeps every amplitude outside the top k basis labels
{2^n - k, ..., 2^n - 1} at exactly zero. When k is a power of two this is done by
pinning the most significant qubits with X gates and running a layered block on
the rest. Otherwise the leftover labels are swapped in with a permutation and a
second, masked layered block mixes the whole top-k window. In the masked block a
rotation pair that would straddle the window boundary is turned into a phase
rotation by conjugating with a fixed basis change, and CNOTs only swap label
pairs that lie inside the window. Every trainable gate stays a bare RX or RY, so
the two-point shift rule remains exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulator import (
    CircuitError,
    Gate,
    GateKind,
    ParamCircuit,
    cnot,
    dense,
    permutation,
    rx,
    ry,
    x,
)


class AnsatzError(ValueError):
    pass


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    k: int
    depth: int = 2

    def __post_init__(self):
        if self.n_qubits < 1:
            raise AnsatzError("ansatz needs at least one qubit")
        if self.k <= 1:
            raise AnsatzError("the symmetry subspace must be of dimension greater than 1")
        if self.k > 2**self.n_qubits:
            raise AnsatzError(f"k={self.k} exceeds the Hilbert space dimension 2^{self.n_qubits}")
        if self.depth < 1:
            raise AnsatzError("ansatz depth must be at least 1")

    @property
    def m(self) -> int:
        return self.k.bit_length() - 1

    @property
    def support(self) -> range:
        return range(2**self.n_qubits - self.k, 2**self.n_qubits)


ENTANGLERS = ("chain", "ring")


def entangling_pairs(qubits, entangler: str = "chain") -> list[tuple[int, int]]:
    """CNOT (control, target) pairs of one entangling layer.

    ``ring`` closes the chain with a CNOT from the last qubit back to the first;
    on two or fewer qubits it is the same as ``chain``.
    """
    if entangler not in ENTANGLERS:
        raise AnsatzError(f"unknown entangler {entangler!r}; expected one of {ENTANGLERS}")
    qubits = list(qubits)
    pairs = list(zip(qubits, qubits[1:]))
    if entangler == "ring" and len(qubits) > 2:
        pairs.append((qubits[-1], qubits[0]))
    return pairs


def layered_gates(qubits, depth: int, prefix: str, entangler: str = "chain") -> tuple[list[Gate], list[str]]:
    qubits = list(qubits)
    pairs = entangling_pairs(qubits, entangler)
    gates: list[Gate] = []
    names: list[str] = []

    def rotation_layer():
        for make in (ry, rx):
            for q in qubits:
                name = f"{prefix}{len(names)}"
                names.append(name)
                gates.append(make(q, name))

    for _ in range(depth):
        rotation_layer()
        gates.extend(cnot(a, b) for a, b in pairs)
    rotation_layer()
    return gates, names


def build_layered_circuit(n: int, depth: int, prefix: str = "t", entangler: str = "chain") -> ParamCircuit:
    """``depth`` layers of (RY all, RX all, CNOT layer) followed by a final RY+RX layer.

    Parameter count is 2*n*depth + 2*n. ``depth=0`` leaves only the final rotations.
    """
    if n < 1 or depth < 0:
        raise AnsatzError(f"invalid layered circuit n={n}, depth={depth}")
    gates, names = layered_gates(range(n), depth, prefix, entangler)
    return ParamCircuit(n, tuple(gates), tuple(names))


# Columns are eigenvectors of the generator, so W^dagger G W = Z on a straddling pair.
_TO_Z = {
    GateKind.RY: np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2),
    GateKind.RX: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}


def _masked_rotation(kind: GateKind, q: int, name: str, n: int, window: set[int]) -> list[Gate]:
    make = ry if kind is GateKind.RY else rx
    dim = 2**n
    basis = np.eye(dim, dtype=complex)
    straddling = False
    for a in range(dim):
        if a >> q & 1:
            continue
        b = a | 1 << q
        if (a in window) != (b in window):
            straddling = True
            basis[np.ix_([a, b], [a, b])] = _TO_Z[kind]
    if not straddling:
        return [make(q, name)]
    # applied in order: V, R, V^dagger
    return [dense(basis, range(n)), make(q, name), dense(basis.conj().T, range(n))]


def _masked_cnot(control: int, target: int, n: int, window: set[int]) -> Gate:
    dest = list(range(2**n))
    for a in range(2**n):
        b = a ^ 1 << target
        if a >> control & 1 and a in window and b in window:
            dest[a] = b
    return permutation(dest, n)


def masked_layered_gates(qubits, depth: int, prefix: str, n: int, window) -> tuple[list[Gate], list[str]]:
    window = set(window)
    plain, names = layered_gates(qubits, depth, prefix)
    gates: list[Gate] = []
    for g in plain:
        if g.kind is GateKind.CNOT:
            gates.append(_masked_cnot(*g.targets, n, window))
        else:
            gates.extend(_masked_rotation(g.kind, g.targets[0], g.param, n, window))
    return gates, names


def build_subspace_ansatz(spec: AnsatzSpec) -> ParamCircuit:
    n, k, depth = spec.n_qubits, spec.k, spec.depth
    m = spec.m
    gates: list[Gate] = [x(q) for q in range(m, n)]
    block, names = layered_gates(range(m), depth, "a")
    gates += block
    extra = k - 2**m
    if extra:
        dim = 2**n
        low = dim - k
        top = dim - 2**m
        # swap the leftover labels low.. with the bottom of the pinned block top..
        dest = list(range(dim))
        for i in range(extra):
            dest[low + i], dest[top + i] = top + i, low + i
        gates.append(permutation(dest, n))
        qubits = range(min(m + 1, n))
        mixed, more = masked_layered_gates(qubits, depth, "b", n, spec.support)
        gates += mixed
        names += more
    try:
        return ParamCircuit(n, tuple(gates), tuple(names))
    except CircuitError as exc:  # pragma: no cover - construction is internal
        raise AnsatzError(str(exc)) from exc


def initial_parameters(circuit: ParamCircuit, rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform draws from [0, 2pi) for every parameter slot."""
    shape = (circuit.n_params,) if size is None else (size, circuit.n_params)
    return rng.uniform(0.0, 2 * np.pi, size=shape)
