"""State-vector simulation of small parameterized circuits.

Qubit 0 is the least-significant bit of a basis label. States are arrays of shape
``(2**n, ...)``; any trailing axes are batch axes and every gate acts on all of them
at once. A 2-d parameter array ``(B, P)`` evaluates B bindings in one pass, with
the state carrying a matching batch axis right after the amplitude axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import ComplexMatrix, ComplexVector, check_unitary


class CircuitError(ValueError):
    pass


class GateKind(str, Enum):
    RX = "RX"
    RY = "RY"
    CNOT = "CNOT"
    X = "X"
    DENSE = "DenseUnitary"
    PERMUTATION = "Permutation"


ROTATIONS = (GateKind.RX, GateKind.RY)


@dataclass(frozen=True, eq=False)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]
    param: str | None = None
    matrix: ComplexMatrix | None = None
    perm: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        kind, targets = self.kind, self.targets
        if kind in ROTATIONS:
            if len(targets) != 1 or self.param is None:
                raise CircuitError(f"{kind.value} needs one target and a parameter slot")
        elif self.param is not None:
            raise CircuitError(f"{kind.value} gates are not parameterized")
        if kind is GateKind.X and len(targets) != 1:
            raise CircuitError("X needs exactly one target")
        if kind is GateKind.CNOT and (len(targets) != 2 or targets[0] == targets[1]):
            raise CircuitError("CNOT needs two distinct targets (control, target)")
        if kind is GateKind.DENSE:
            if self.matrix is None:
                raise CircuitError("DenseUnitary needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2 ** len(targets),) * 2:
                raise CircuitError(f"matrix shape {m.shape} does not fit {len(targets)} targets")
            if not check_unitary(m, 1e-10):
                raise CircuitError("DenseUnitary matrix is not unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if kind is GateKind.PERMUTATION:
            if self.perm is None:
                raise CircuitError("Permutation gate needs a label map")
            perm = tuple(int(p) for p in self.perm)
            if sorted(perm) != list(range(len(perm))):
                raise CircuitError("Permutation map is not a bijection on basis labels")
            object.__setattr__(self, "perm", perm)


def rx(q: int, param: str) -> Gate:
    return Gate(GateKind.RX, (q,), param=param)


def ry(q: int, param: str) -> Gate:
    return Gate(GateKind.RY, (q,), param=param)


def cnot(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def x(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def dense(matrix, targets) -> Gate:
    return Gate(GateKind.DENSE, tuple(targets), matrix=matrix)


def permutation(perm, n_qubits: int) -> Gate:
    """Gate sending basis label ``i`` to ``perm[i]``."""
    if len(perm) != 2**n_qubits:
        raise CircuitError(f"permutation of length {len(perm)} on {n_qubits} qubits")
    return Gate(GateKind.PERMUTATION, tuple(range(n_qubits)), perm=tuple(perm))


@dataclass(frozen=True, eq=False)
class ParamCircuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    param_names: tuple[str, ...] = field(default=None)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        slots = [g.param for g in gates if g.param is not None]
        names = tuple(dict.fromkeys(slots)) if self.param_names is None else tuple(self.param_names)
        if len(set(names)) != len(names):
            raise CircuitError("parameter names must be unique")
        missing = set(slots) - set(names)
        if missing:
            raise CircuitError(f"gates reference undeclared parameters {sorted(missing)}")
        object.__setattr__(self, "param_names", names)
        for g in gates:
            if any(not 0 <= t < self.n_qubits for t in g.targets):
                raise CircuitError(f"{g.kind.value} target out of range for {self.n_qubits} qubits")
            if g.kind is GateKind.PERMUTATION and len(g.perm) != 2**self.n_qubits:
                raise CircuitError("permutation size does not match the register")
        index = {name: i for i, name in enumerate(names)}
        object.__setattr__(self, "_slot", tuple(index.get(g.param, -1) for g in gates))

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def then(self, other: "ParamCircuit") -> "ParamCircuit":
        """Concatenate two circuits on the same register; parameter lists are joined."""
        if other.n_qubits != self.n_qubits:
            raise CircuitError("cannot concatenate circuits on different registers")
        clash = set(self.param_names) & set(other.param_names)
        if clash:
            raise CircuitError(f"parameter names collide: {sorted(clash)}")
        return ParamCircuit(
            self.n_qubits, self.gates + other.gates, self.param_names + other.param_names
        )


def basis_state(n: int, label: int) -> ComplexVector:
    if not 0 <= label < 2**n:
        raise CircuitError(f"basis label {label} out of range for {n} qubits")
    psi = np.zeros(2**n, dtype=complex)
    psi[label] = 1.0
    return psi


# -- kernels -----------------------------------------------------------------


def _pair_view(psi: np.ndarray, q: int):
    dim = psi.shape[0]
    v = psi.reshape(dim >> (q + 1), 2, 1 << q, *psi.shape[1:])
    return v[:, 0], v[:, 1]


def _apply_rotation(psi, kind, q, angle, batched):
    half = 0.5 * np.asarray(angle, dtype=float)
    c, s = np.cos(half), np.sin(half)
    if batched:
        # angle has shape (B,); state is (dim, B, ...)
        shape = (1, 1, -1) + (1,) * (psi.ndim - 2)
        c, s = c.reshape(shape), s.reshape(shape)
    a0, a1 = _pair_view(psi, q)
    if kind is GateKind.RY:
        t0, t1 = s * a0, s * a1
        a0 *= c
        a0 -= t1
        a1 *= c
        a1 += t0
    else:
        ms = -1j * s
        t0, t1 = ms * a0, ms * a1
        a0 *= c
        a0 += t1
        a1 *= c
        a1 += t0


def _label_permutation(n: int, gate: Gate) -> np.ndarray:
    """Return ``dest`` with the gate sending basis label i to dest[i]."""
    labels = np.arange(2**n)
    if gate.kind is GateKind.X:
        return labels ^ (1 << gate.targets[0])
    if gate.kind is GateKind.CNOT:
        c, t = gate.targets
        return np.where((labels >> c) & 1, labels ^ (1 << t), labels)
    return np.asarray(gate.perm)


def _apply_dense(psi, matrix, targets, n):
    dim = psi.shape[0]
    rest = psi.shape[1:]
    if len(targets) == n and list(targets) == list(range(n)):
        return np.tensordot(matrix, psi, axes=(1, 0))
    # tensor axis j holds qubit n-1-j
    t = psi.reshape((2,) * n + rest)
    axes = [n - 1 - q for q in reversed(targets)]
    t = np.moveaxis(t, axes, range(len(axes)))
    moved_shape = t.shape
    t = matrix @ t.reshape(2 ** len(targets), -1)
    t = np.moveaxis(t.reshape(moved_shape), range(len(axes)), axes)
    return np.ascontiguousarray(t.reshape((dim,) + rest))


def apply_gate(gate: Gate, psi: np.ndarray, n: int, angle=None, batched=False) -> np.ndarray:
    """Apply one gate, possibly in place. Returns the resulting array."""
    if gate.kind in ROTATIONS:
        _apply_rotation(psi, gate.kind, gate.targets[0], angle, batched)
        return psi
    if gate.kind is GateKind.DENSE:
        return _apply_dense(psi, gate.matrix, gate.targets, n)
    dest = _label_permutation(n, gate)
    out = np.empty_like(psi)
    out[dest] = psi
    return out


def apply_circuit(c: ParamCircuit, params, state) -> np.ndarray:
    """Run ``c`` with ``params`` on ``state``; the input array is not modified.

    ``params`` is either a vector of length ``c.n_params`` or a ``(B, n_params)``
    array. In the batched case ``state`` is ``(2**n,)`` (shared by all bindings),
    ``(2**n, B)`` or ``(2**n, B, C)``.
    """
    params = np.asarray(params, dtype=float)
    batched = params.ndim == 2
    if params.shape[-1] != c.n_params or params.ndim not in (1, 2):
        raise CircuitError(
            f"circuit has {c.n_params} parameters, got array of shape {params.shape}"
        )
    psi = np.array(state, dtype=complex)
    if psi.shape[0] != c.dim:
        raise CircuitError(f"state dimension {psi.shape[0]} != 2**{c.n_qubits}")
    if batched:
        b = params.shape[0]
        if psi.ndim == 1:
            psi = np.repeat(psi[:, None], b, axis=1)
        elif psi.shape[1] != b:
            raise CircuitError("batched state must carry the parameter batch on axis 1")
        psi = np.ascontiguousarray(psi)
    for gate, slot in zip(c.gates, c._slot):
        angle = None
        if slot >= 0:
            angle = params[:, slot] if batched else params[slot]
        psi = apply_gate(gate, psi, c.n_qubits, angle, batched)
    return psi


def circuit_unitary(c: ParamCircuit, params) -> ComplexMatrix:
    """Dense matrix of the bound circuit (columns are images of basis states)."""
    return apply_circuit(c, params, np.eye(c.dim, dtype=complex))


def expectations(states: np.ndarray, op: ComplexMatrix) -> np.ndarray:
    """Real expectation values for each column of a ``(dim, B)`` state array."""
    vals = np.einsum("ib,ij,jb->b", states.conj(), op, states)
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-8:
        raise CircuitError("expectation has a large imaginary part; operator not Hermitian?")
    return vals.real


def expectation(state: ComplexVector, op: ComplexMatrix) -> float:
    state = np.asarray(state, dtype=complex)
    op = np.asarray(op, dtype=complex)
    if op.shape != (state.shape[0],) * 2:
        raise CircuitError(f"operator {op.shape} does not match state of dim {state.shape[0]}")
    val = np.vdot(state, op @ state)
    if abs(val.imag) > 1e-8:
        raise CircuitError(
            f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?"
        )
    return float(val.real)


# -- dense reference matrices (used by oracles and tests) ----------------------

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def rotation_matrix(kind: GateKind, angle: float) -> ComplexMatrix:
    gen = PAULI["Y"] if kind is GateKind.RY else PAULI["X"]
    return np.cos(angle / 2) * PAULI["I"] - 1j * np.sin(angle / 2) * gen
