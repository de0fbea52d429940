"""Dense complex linear algebra on small matrices.

Matrices and vectors are plain ``complex128`` numpy arrays. The eigensolver is a
cyclic Jacobi iteration written out here rather than delegated to LAPACK, so its
ordering and degenerate-block conventions are fully under our control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ComplexMatrix = np.ndarray
ComplexVector = np.ndarray

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
DEGENERACY_TOL = 1e-9


class LinalgError(ValueError):
    """Raised on malformed input to a linear-algebra routine."""


class EigenConvergenceError(RuntimeError):
    """Jacobi sweeps exhausted before the off-diagonal norm fell below tolerance."""

    def __init__(self, residual: float, sweeps: int):
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps; "
            f"residual off-diagonal norm {residual:.3e}"
        )
        self.residual = residual
        self.sweeps = sweeps


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: ComplexMatrix  # columns

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> ComplexMatrix:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise LinalgError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(m).T


def matmul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise LinalgError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def identity(n: int) -> ComplexMatrix:
    return np.eye(n, dtype=complex)


def kron_all(mats) -> ComplexMatrix:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def check_hermitian(m: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def check_unitary(m: ComplexMatrix, tol: float = UNITARY_TOL) -> bool:
    """True iff every entry of ``M^dagger M - I`` is at most ``tol`` in modulus."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise LinalgError(f"unitarity check needs a square matrix, got {a.shape}")
    err = a.conj().T @ a - np.eye(a.shape[0])
    return bool(np.max(np.abs(err), initial=0.0) <= tol)


def check_orthonormal_columns(m: ComplexMatrix, tol: float = UNITARY_TOL) -> bool:
    a = as_matrix(m)
    err = a.conj().T @ a - np.eye(a.shape[1])
    return bool(np.max(np.abs(err), initial=0.0) <= tol)


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return matmul(a, b) - matmul(b, a)


def _off_norm(a: ComplexMatrix) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _jacobi(a: ComplexMatrix, tol: float, max_sweeps: int):
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    # Absolute target, scaled up only for matrices with large entries.
    target = tol * max(1.0, float(np.linalg.norm(a)))
    for sweep in range(max_sweeps + 1):
        residual = _off_norm(a)
        if residual < target:
            return np.real(np.diag(a)).copy(), v
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # J = [[c, s], [-s conj(phase), c conj(phase)]] on (p, q)
                cp = np.conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * cp * col_q
                a[:, q] = s * col_p + c * cp * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * row_p + c * phase * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * cp * vq
                v[:, q] = s * vp + c * cp * vq
    raise EigenConvergenceError(residual, max_sweeps)


def _fix_phase(vec: ComplexVector) -> ComplexVector:
    mags = np.abs(vec)
    # first entry within round-off of the maximum, so near-ties resolve by index
    idx = int(np.argmax(mags >= mags.max() - 1e-12))
    return vec * (np.conj(vec[idx]) / mags[idx])


def _canonical_block(block: ComplexMatrix) -> ComplexMatrix:
    """Basis of span(block) built by Gram-Schmidt on projected unit vectors e_0, e_1, ..."""
    dim, d = block.shape
    if d == 1:
        return _fix_phase(block[:, 0])[:, None]
    proj = block @ block.conj().T
    threshold = 0.5 / np.sqrt(dim)
    chosen: list[ComplexVector] = []
    for j in range(dim):
        w = proj[:, j].copy()
        for _ in range(2):
            for u in chosen:
                w -= u * np.vdot(u, w)
        norm = np.linalg.norm(w)
        if norm > threshold:
            chosen.append(w / norm)
            if len(chosen) == d:
                break
    if len(chosen) < d:
        raise LinalgError("could not build a canonical basis for a degenerate block")
    return np.column_stack([_fix_phase(u) for u in chosen])


def eigh(
    m: ComplexMatrix,
    *,
    tol: float = 1e-12,
    max_sweeps: int = 100,
    hermitian_tol: float = HERMITIAN_TOL,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back ascending. Eigenvalues closer than ``degeneracy_tol`` form
    a block whose eigenvectors are replaced by a canonical basis: the projections
    of e_0, e_1, ... onto the block, Gram-Schmidt orthonormalized in that order.
    Every column is then phased so its largest-magnitude entry is real positive.
    Identical input therefore always yields identical output.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise LinalgError(f"eigh needs a square matrix, got {a.shape}")
    if not check_hermitian(a, hermitian_tol):
        raise LinalgError("eigh needs a Hermitian matrix")
    a = 0.5 * (a + a.conj().T)
    values, vectors = _jacobi(a, tol, max_sweeps)

    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    columns = []
    start = 0
    n = len(values)
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[stop - 1] <= degeneracy_tol:
            stop += 1
        columns.append(_canonical_block(vectors[:, start:stop]))
        start = stop
    return EigenDecomposition(eigenvalues=values, eigenvectors=np.hstack(columns))


def eigenvalue_multiplicities(values, tol: float = 1e-6) -> list[tuple[float, int]]:
    """Group sorted eigenvalues into (value, multiplicity) pairs."""
    groups: list[list[float]] = []
    for x in sorted(values):
        if groups and x - groups[-1][-1] <= tol:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(float(np.mean(g)), len(g)) for g in groups]
