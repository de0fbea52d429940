"""Symmetry sectors and the exact sector-confining unitary (Method 1)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    ComplexMatrix,
    check_hermitian,
    check_orthonormal_columns,
    check_unitary,
    eigh,
)

SECTOR_TOL = 1e-6


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymmetrySector:
    """Eigenspace of ``operator`` with eigenvalue ``target_value``."""

    operator: ComplexMatrix
    target_value: float
    dim_k: int
    sector_vectors: ComplexMatrix

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(self.dim).bit_length() - 1

    def shifted(self) -> ComplexMatrix:
        return self.operator - self.target_value * np.eye(self.dim)

    def penalty(self) -> ComplexMatrix:
        """The Hermitian matrix (O - S)^2 whose expectation measures symmetry violation."""
        shifted = self.shifted()
        return shifted @ shifted

    def sq_errors(self, states) -> np.ndarray:
        """<(O - S)^2> for each column of ``states``, evaluated as ||(O - S) psi||^2.

        Same value as the expectation of :meth:`penalty`, but it cannot go negative
        and it stays at the 1e-32 level for states inside the sector instead of
        picking up 1e-16 cancellation noise.
        """
        states = np.asarray(states)
        r = np.tensordot(self.shifted(), states, axes=(1, 0))
        return np.sum(np.abs(r) ** 2, axis=0)


def _split(op: ComplexMatrix, S: float, tol: float):
    if tol <= 0:
        raise SymmetryError("sector tolerance must be positive")
    if not check_hermitian(op):
        raise SymmetryError("symmetry operator must be Hermitian")
    dec = eigh(op)
    inside = np.abs(dec.eigenvalues - S) <= tol
    return dec, inside


def extract_sector(op: ComplexMatrix, S: float, tol: float = SECTOR_TOL) -> SymmetrySector:
    op = np.array(op, dtype=complex)
    dec, inside = _split(op, S, tol)
    k = int(inside.sum())
    if k == 0:
        raise SymmetryError(f"no eigenvalue of the operator lies within {tol:g} of S={S:g}")
    if k <= 1:
        raise SymmetryError(
            "the method requires the symmetry subspace to be of dimension greater than 1 "
            f"(S={S:g} has dimension {k})"
        )
    vectors = dec.eigenvectors[:, inside]
    vectors.setflags(write=False)
    op.setflags(write=False)
    return SymmetrySector(operator=op, target_value=float(S), dim_k=k, sector_vectors=vectors)


def sector_dimensions(op: ComplexMatrix, values=(1.0, -1.0), tol: float = SECTOR_TOL):
    """Number of eigenvalues within ``tol`` of each of ``values``."""
    dec = eigh(op)
    return tuple(int(np.sum(np.abs(dec.eigenvalues - v) <= tol)) for v in values)


def build_exact_unitary(sector: SymmetrySector, tol: float = SECTOR_TOL) -> ComplexMatrix:
    """Unitary whose last k columns are the sector eigenvectors.

    The leading columns are the remaining eigenvectors of the operator in ascending
    eigenvalue order, so the unitary sends basis labels 2^n-k .. 2^n-1 into the sector.
    """
    dec, inside = _split(sector.operator, sector.target_value, tol)
    u = np.hstack([dec.eigenvectors[:, ~inside], sector.sector_vectors])
    if not check_orthonormal_columns(u) or not check_unitary(u):
        raise SymmetryError("assembled eigenvector columns are not orthonormal")
    return u
