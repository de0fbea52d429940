"""Method 2: learn a shallow circuit that maps ansatz states into the symmetry sector."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import build_layered_circuit
from .simulator import ROTATIONS, ParamCircuit, apply_circuit, apply_gate, basis_state
from .symmetry import SymmetrySector
from .vqe import shift_gradient, shifted_batch


SAMPLE_CHUNK = 64


class TrainingError(RuntimeError):
    """Iteration budget ran out before the symmetry error reached its threshold."""

    def __init__(self, best_error: float, iterations: int, target: float, theta=None, history=None, start_log=None):
        super().__init__(
            f"training stopped after {iterations} iterations with mean symmetry error "
            f"{best_error:.3e} > target {target:.3e}; the circuit may be too shallow"
        )
        self.best_error = best_error
        self.iterations = iterations
        self.theta = theta
        self.history = list(history or [])
        self.start_log = list(start_log or [])


@dataclass(frozen=True)
class TrainingConfig:
    depth: int = 5
    n_samples: int = 100
    target_mean_error: float = 1e-3
    max_iterations: int = 60000  # total over all starts
    step_bound: float = 0.5
    bound_decay: float = 0.9
    learning_rate: float = 1.0
    entangler: str = "ring"
    init_scale: float = 1.0  # std of the normal draw for each starting theta
    restart_iterations: int = 3000
    min_step_bound: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.target_mean_error <= 0:
            raise ValueError("target_mean_error must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.step_bound <= 0 or not 0 < self.bound_decay <= 1:
            raise ValueError("invalid step bound schedule")
        if self.init_scale < 0:
            raise ValueError("init_scale must be non-negative")
        if self.max_iterations < 1 or self.restart_iterations < 1:
            raise ValueError("iteration limits must be at least 1")


@dataclass
class TrainedUnitary:
    circuit: ParamCircuit
    theta_star: np.ndarray
    achieved_mean_error: float  # on a held-out sample set never used in training
    iterations_used: int
    validation_error: float = math.nan
    history: list[float] = field(default_factory=list)  # best validation cost after each iteration
    starts: int = 1
    start_log: list[tuple[int, float]] = field(default_factory=list)  # (iterations, final cost) per start


def _sample_alphas(rng: np.random.Generator, ansatz: ParamCircuit, count: int) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=(count, ansatz.n_params))


def ansatz_states(ansatz: ParamCircuit, alphas) -> np.ndarray:
    return apply_circuit(ansatz, np.atleast_2d(alphas), basis_state(ansatz.n_qubits, 0))


def symmetry_cost(theta, sector: SymmetrySector, alphas, ansatz: ParamCircuit, utilde: ParamCircuit) -> float:
    """Mean of <(O - S)^2> over Utilde(theta) A(alpha)|0> for every alpha in ``alphas``."""
    psi = ansatz_states(ansatz, alphas)
    out = apply_circuit(utilde, theta, psi)
    return float(np.mean(sector.sq_errors(out)))


def _sample_matrix(ansatz: ParamCircuit, alphas) -> np.ndarray:
    """Columns psi_i / sqrt(N), so that R R^dagger is the sample density matrix."""
    psi = ansatz_states(ansatz, alphas)
    return psi / np.sqrt(psi.shape[1])


def compress_samples(samples: np.ndarray, rel_tol: float = 1e-13) -> np.ndarray:
    """A factor F with F F^dagger = R R^dagger and at most rank(R) columns.

    Cholesky of the Gram matrix R R^dagger, skipping pivots that are zero to within
    ``rel_tol`` of its trace. Ansatz samples live in a k-dimensional support, so
    this turns N sample columns into k columns without changing any cost.
    ``samples`` may carry a leading batch axis, (B, dim, N); columns are then
    dropped only where they vanish for every batch member.
    """
    single = samples.ndim == 2
    r = samples[None] if single else samples
    gram = r @ r.conj().transpose(0, 2, 1)
    b, dim, _ = gram.shape
    tol = rel_tol * np.maximum(np.trace(gram, axis1=1, axis2=2).real, 1e-300)
    factor = np.zeros((b, dim, dim), dtype=complex)
    for j in range(dim):
        d = gram[:, j, j].real - np.sum(np.abs(factor[:, j, :j]) ** 2, axis=1)
        ok = d > tol
        pivot = np.sqrt(np.where(ok, d, 1.0))
        col = gram[:, j + 1 :, j] - np.einsum("bik,bk->bi", factor[:, j + 1 :, :j], factor[:, j, :j].conj())
        factor[:, j, j] = np.where(ok, pivot, 0.0)
        factor[:, j + 1 :, j] = np.where(ok[:, None], col / pivot[:, None], 0.0)
    keep = np.any(factor != 0, axis=(0, 1))
    factor = factor[:, :, keep]
    return factor[0] if single else factor


def _batched_costs(utilde: ParamCircuit, thetas: np.ndarray, samples: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    """||(O - S) U(theta_b) R||_F^2 for every row of ``thetas``.

    With R from :func:`_sample_matrix` this is the sample mean of
    :func:`symmetry_cost`, but the circuit is simulated once per binding on the
    identity rather than once per sample.
    """
    dim = utilde.dim
    b = thetas.shape[0]
    eye = np.broadcast_to(np.eye(dim, dtype=complex)[:, None, :], (dim, b, dim))
    u = apply_circuit(utilde, thetas, eye).transpose(1, 0, 2)
    z = shifted @ u @ samples
    return np.sum(np.abs(z) ** 2, axis=(1, 2))


class ShiftRuleEvaluator:
    """Cost at theta and at every theta +/- pi/2 e_j, in :func:`shifted_batch` order.

    The numbers equal those of :func:`_batched_costs` on the shifted batch, but are
    obtained from one sweep over the circuit. With prefix P_j (gates before the
    rotation j applied to the samples) and suffix Q_j ((O - S) times the gates
    from rotation j on), the identity R(phi +/- pi/2) = R(phi)(I -/+ iG)/sqrt(2)
    gives

        cost(theta +/- pi/2 e_j) = ||Z -/+ i Q_j G_j P_j||_F^2 / 2,   Z = (O - S) U R.

    Every parameter must drive exactly one RX or RY gate.
    """

    def __init__(self, utilde: ParamCircuit, shifted: np.ndarray):
        slots = [s for s in utilde._slot if s >= 0]
        if len(slots) != len(set(slots)) or len(slots) != utilde.n_params:
            raise ValueError("every circuit parameter must drive exactly one gate")
        self.circuit = utilde
        self.shifted = np.asarray(shifted, dtype=complex)
        dim, n = utilde.dim, utilde.n_qubits
        eye = np.eye(dim, dtype=complex)
        self._fixed = []
        self._generators = []
        for gate, slot in zip(utilde.gates, utilde._slot):
            if slot >= 0:
                if gate.kind not in ROTATIONS:
                    raise ValueError("shift rule needs RX or RY parameter gates")
                # the full-register generator: X or Y on the target qubit
                gen = 1j * apply_gate(gate, eye.copy(), n, np.pi)
                self._fixed.append(None)
                self._generators.append(gen)
            else:
                self._fixed.append(apply_gate(gate, eye.copy(), n))
                self._generators.append(None)
        self._eye = eye

    def _matrices(self, theta):
        mats = []
        for fixed, gen, slot in zip(self._fixed, self._generators, self.circuit._slot):
            if fixed is not None:
                mats.append(fixed)
            else:
                half = 0.5 * theta[slot]
                mats.append(np.cos(half) * self._eye - 1j * np.sin(half) * gen)
        return mats

    def cost(self, theta, samples: np.ndarray) -> float:
        out = samples
        for m in self._matrices(np.asarray(theta, dtype=float)):
            out = m @ out
        return float(np.sum(np.abs(self.shifted @ out) ** 2))

    def costs(self, theta, samples: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        p = self.circuit.n_params
        mats = self._matrices(theta)
        prefix = [samples]
        for m in mats[:-1]:
            prefix.append(m @ prefix[-1])
        suffix = [self.shifted]
        for m in reversed(mats):
            suffix.append(suffix[-1] @ m)
        suffix.reverse()  # suffix[i] = (O - S) G_last ... G_i
        z = suffix[0] @ samples
        order = np.empty(p, dtype=int)
        qs, ps = [], []
        for i, slot in enumerate(self.circuit._slot):
            if slot >= 0:
                order[slot] = len(qs)
                qs.append(suffix[i])
                ps.append(self._generators[i] @ prefix[i])
        w = (np.stack(qs) @ np.stack(ps))[order]
        base = np.sum(np.abs(z) ** 2)
        cross = np.sum((z.conj()[None] * w).imag, axis=(1, 2))  # Im <Z, W_j>
        wn = np.sum(np.abs(w) ** 2, axis=(1, 2))
        # ||Z -/+ iW||^2 = |Z|^2 + |W|^2 +/- 2 Im<Z, W>
        plus = 0.5 * (base + wn) + cross
        minus = 0.5 * (base + wn) - cross
        return np.concatenate([[base], plus, minus])


def train_unitary(
    sector: SymmetrySector,
    cfg: TrainingConfig,
    ansatz: ParamCircuit,
    utilde: ParamCircuit | None = None,
) -> TrainedUnitary:
    """Minimize the sample-averaged symmetry error over the circuit parameters.

    Each iteration draws fresh alpha samples for the gradient. A step is kept only
    if it lowers the cost on a fixed validation set; otherwise the per-coordinate
    bound shrinks by ``bound_decay``. A start ends when the bound has collapsed
    below ``min_step_bound`` or after ``restart_iterations`` iterations, and the
    next start draws a new theta with the bound reset. ``max_iterations`` caps the
    total over all starts. Training succeeds once the validation cost is under
    target and a separate held-out set confirms it.
    """
    if utilde is None:
        utilde = build_layered_circuit(sector.n_qubits, cfg.depth, prefix="t", entangler=cfg.entangler)
    evaluator = ShiftRuleEvaluator(utilde, sector.shifted())
    rng = np.random.default_rng(cfg.seed)
    val_samples = compress_samples(_sample_matrix(ansatz, _sample_alphas(rng, ansatz, cfg.n_samples)))
    test_samples = compress_samples(_sample_matrix(ansatz, _sample_alphas(rng, ansatz, cfg.n_samples)))
    p = utilde.n_params

    cost = evaluator.cost
    pool: list[np.ndarray] = []

    def fresh_samples() -> np.ndarray:
        # fresh draws for every gradient, simulated SAMPLE_CHUNK iterations at a time
        if not pool:
            alphas = _sample_alphas(rng, ansatz, SAMPLE_CHUNK * cfg.n_samples)
            psi = ansatz_states(ansatz, alphas).reshape(-1, SAMPLE_CHUNK, cfg.n_samples)
            batch = compress_samples(psi.transpose(1, 0, 2) / np.sqrt(cfg.n_samples))
            pool.extend(reversed(list(batch)))
        return pool.pop()

    best_theta, best_val = None, math.inf
    history: list[float] = []
    starts = 0
    start_log: list[tuple[int, float]] = []
    it = 0
    while it < cfg.max_iterations:
        starts += 1
        theta = rng.normal(0.0, cfg.init_scale, p)
        val = cost(theta, val_samples)
        bound = cfg.step_bound
        steps = 0
        while True:
            if val < best_val:
                best_theta, best_val = theta, val
            if val <= cfg.target_mean_error:
                held_out = cost(theta, test_samples)
                if held_out <= cfg.target_mean_error:
                    start_log.append((steps, val))
                    return TrainedUnitary(utilde, theta, held_out, it, val, history, starts, start_log)
            if it >= cfg.max_iterations or steps >= cfg.restart_iterations or bound < cfg.min_step_bound:
                break
            it += 1
            steps += 1
            grad = shift_gradient(evaluator.costs(theta, fresh_samples()), p)
            cand = theta - np.clip(cfg.learning_rate * grad, -bound, bound)
            cand_val = cost(cand, val_samples)
            if cand_val < val:
                theta, val = cand, cand_val
            else:
                bound *= cfg.bound_decay
            history.append(min(best_val, val))
        start_log.append((steps, val))
    held_out = cost(best_theta, test_samples)
    raise TrainingError(max(best_val, held_out), it, cfg.target_mean_error, best_theta, history, start_log)


def save_theta(path, names, theta) -> None:
    """Write ``name=value`` lines with 17 significant digits."""
    lines = [f"{name}={float(v):.17g}" for name, v in zip(names, theta)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_theta(path, names) -> np.ndarray:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected name=value")
        values[key.strip()] = float(value)
    missing = [n for n in names if n not in values]
    if missing:
        raise ValueError(f"{path}: missing parameters {missing[:5]}")
    return np.array([values[n] for n in names])
