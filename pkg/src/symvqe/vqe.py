"""Energy minimization over the ansatz parameters with shift-rule gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import ComplexMatrix
from .oracle import OracleResult, manifold_fidelity
from .simulator import ROTATIONS, CircuitError, ParamCircuit, apply_circuit, basis_state, circuit_unitary, expectations
from .symmetry import SymmetrySector

SHIFT = np.pi / 2


@dataclass(frozen=True)
class VqeConfig:
    max_iterations: int = 2000
    step_bound: float = 0.5
    bound_decay: float = 0.9
    convergence_grad_norm: float = 1e-6
    learning_rate: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.step_bound <= 0:
            raise ValueError("step_bound must be positive")
        if not 0 < self.bound_decay <= 1:
            raise ValueError("bound_decay must lie in (0, 1]")
        if self.convergence_grad_norm <= 0:
            raise ValueError("convergence_grad_norm must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    energy: float
    energy_error: float
    fidelity: float
    symmetry_mean: float
    symmetry_sq_error: float

    FIELDS = ("iteration", "energy", "energy_error", "fidelity", "symmetry_mean", "symmetry_sq_error")


@dataclass(frozen=True, eq=False)
class StatePrep:
    """Ansatz A(alpha) on |0...0>, optionally followed by a fixed unitary.

    ``tail`` is the exact sector unitary U (Method 1) or the dense matrix of a
    trained circuit with its parameters frozen (Method 2).
    """

    ansatz: ParamCircuit
    tail: ComplexMatrix | None = None
    label: str = ""

    def __post_init__(self):
        slots = [g.param for g in self.ansatz.gates if g.param is not None]
        if len(slots) != len(set(slots)):
            raise CircuitError("each ansatz parameter must drive exactly one gate")
        if any(g.kind not in ROTATIONS for g in self.ansatz.gates if g.param is not None):
            raise CircuitError("shift-rule gradients need every parameterized gate to be RX or RY")

    @property
    def n_params(self) -> int:
        return self.ansatz.n_params

    def states(self, alphas) -> np.ndarray:
        psi = apply_circuit(self.ansatz, alphas, basis_state(self.ansatz.n_qubits, 0))
        if self.tail is not None:
            psi = np.tensordot(self.tail, psi, axes=(1, 0))
        return psi


def method1_prep(ansatz: ParamCircuit, unitary: ComplexMatrix) -> StatePrep:
    return StatePrep(ansatz, np.asarray(unitary, dtype=complex), label="method1")


def method2_prep(ansatz: ParamCircuit, utilde: ParamCircuit, theta) -> StatePrep:
    return StatePrep(ansatz, circuit_unitary(utilde, theta), label="method2")


def energy(alpha, prep: StatePrep, H: ComplexMatrix) -> float:
    psi = prep.states(np.asarray(alpha, dtype=float)[None, :])
    return float(expectations(psi, H)[0])


def shifted_batch(alpha) -> np.ndarray:
    """Rows: alpha, then alpha + pi/2 e_j for each j, then alpha - pi/2 e_j."""
    alpha = np.asarray(alpha, dtype=float)
    p = alpha.size
    eye = np.eye(p) * SHIFT
    return np.vstack([alpha[None, :], alpha + eye, alpha - eye])


def shift_gradient(values: np.ndarray, p: int) -> np.ndarray:
    return 0.5 * (values[1 : p + 1] - values[p + 1 :])


def parameter_shift_grad(alpha, prep: StatePrep, H: ComplexMatrix) -> np.ndarray:
    """Exact gradient from evaluations at alpha_j +/- pi/2 (points pi apart)."""
    batch = shifted_batch(alpha)
    vals = expectations(prep.states(batch), H)
    return shift_gradient(vals, batch.shape[1])


@dataclass
class VqeResult:
    alpha_star: np.ndarray
    traces: list[TraceRecord] = field(default_factory=list)
    converged: bool = False
    final_state: np.ndarray | None = None
    # (bound in force, largest coordinate change, accepted) per proposed step
    steps: list[tuple[float, float, bool]] = field(default_factory=list)

    def __iter__(self):
        yield self.alpha_star
        yield self.traces


def minimize(
    prep: StatePrep,
    H: ComplexMatrix,
    cfg: VqeConfig,
    oracle_ref: OracleResult,
    sector: SymmetrySector,
    alpha0=None,
) -> VqeResult:
    """Clipped gradient descent on the prepared-state energy.

    Each iteration proposes alpha - clip(lr * grad, +/- bound). A proposal that does
    not lower the energy is rejected and the bound shrinks by ``bound_decay``.
    One trace record is written per iteration, for the current (accepted) point.
    """
    H = np.asarray(H, dtype=complex)
    sym_op = sector.operator
    p = prep.n_params
    if alpha0 is None:
        alpha = np.random.default_rng(cfg.seed).uniform(0.0, 2 * np.pi, p)
    else:
        alpha = np.array(alpha0, dtype=float)
        if alpha.shape != (p,):
            raise CircuitError(f"initial point has shape {alpha.shape}, expected ({p},)")

    def evaluate(a):
        psi = prep.states(shifted_batch(a))
        vals = expectations(psi, H)
        return vals[0], shift_gradient(vals, p), psi[:, 0]

    e, grad, state = evaluate(alpha)
    bound = cfg.step_bound
    result = VqeResult(alpha_star=alpha)
    for it in range(cfg.max_iterations):
        result.traces.append(
            TraceRecord(
                iteration=it,
                energy=float(e),
                energy_error=float(e - oracle_ref.sector_ground_energy),
                fidelity=manifold_fidelity(state, oracle_ref.ground_manifold),
                symmetry_mean=float(expectations(state[:, None], sym_op)[0]),
                symmetry_sq_error=float(sector.sq_errors(state)),
            )
        )
        if np.max(np.abs(grad)) < cfg.convergence_grad_norm:
            result.converged = True
            break
        if it == cfg.max_iterations - 1 or bound < 1e-14:
            break
        step = np.clip(cfg.learning_rate * grad, -bound, bound)
        cand = alpha - step
        e_new, g_new, s_new = evaluate(cand)
        accepted = bool(e_new < e)
        result.steps.append((bound, float(np.max(np.abs(step))), accepted))
        if accepted:
            alpha, e, grad, state = cand, e_new, g_new, s_new
        else:
            bound *= cfg.bound_decay
    result.alpha_star = alpha
    result.final_state = state
    return result
