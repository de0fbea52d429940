"""Exact-diagonalization reference values for traces and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import ComplexMatrix, ComplexVector, commutator, eigh
from .symmetry import SymmetrySector

COMMUTATOR_TOL = 1e-9
GROUND_DEGENERACY_TOL = 1e-8


class OracleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OracleResult:
    sector_ground_energy: float
    sector_ground_state: ComplexVector
    full_ground_energy: float
    sector_spectrum: np.ndarray
    # columns span the (possibly degenerate) lowest level inside the sector
    ground_manifold: ComplexMatrix
    full_spectrum: np.ndarray

    @property
    def ground_in_sector(self) -> bool:
        """Whether the global ground energy is attained inside the sector."""
        return abs(self.sector_ground_energy - self.full_ground_energy) <= GROUND_DEGENERACY_TOL


def subspace_ground(H: ComplexMatrix, sector: SymmetrySector) -> OracleResult:
    H = np.asarray(H, dtype=complex)
    if H.shape != sector.operator.shape:
        raise OracleError(f"Hamiltonian {H.shape} and symmetry operator {sector.operator.shape} differ")
    comm = float(np.max(np.abs(commutator(H, sector.operator))))
    if comm > COMMUTATOR_TOL:
        raise OracleError(
            f"Hamiltonian does not commute with the symmetry operator (max |[H,O]| = {comm:.3e})"
        )
    p = sector.sector_vectors
    projected = p.conj().T @ H @ p
    projected = 0.5 * (projected + projected.conj().T)
    dec = eigh(projected)
    values = dec.eigenvalues
    g = int(np.sum(values - values[0] <= GROUND_DEGENERACY_TOL))
    manifold = p @ dec.eigenvectors[:, :g]
    full = eigh(H).eigenvalues
    return OracleResult(
        sector_ground_energy=float(values[0]),
        sector_ground_state=manifold[:, 0].copy(),
        full_ground_energy=float(full[0]),
        sector_spectrum=values,
        ground_manifold=manifold,
        full_spectrum=full,
    )


def fidelity(state: ComplexVector, reference: ComplexVector) -> float:
    """|<reference|state>|^2, clipped into [0, 1]."""
    state = np.asarray(state, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    if state.shape != reference.shape:
        raise OracleError(f"state shapes differ: {state.shape} vs {reference.shape}")
    return float(min(1.0, abs(np.vdot(reference, state)) ** 2))


def manifold_fidelity(state: ComplexVector, manifold: ComplexMatrix) -> float:
    """Weight of ``state`` on the span of the orthonormal columns of ``manifold``."""
    overlaps = np.asarray(manifold).conj().T @ np.asarray(state, dtype=complex)
    return float(min(1.0, np.sum(np.abs(overlaps) ** 2)))


def is_submultiset(sub, full, tol: float = 1e-9) -> bool:
    """Each value of ``sub`` can be matched to a distinct value of ``full`` within ``tol``."""
    remaining = sorted(full)
    for x in sorted(sub):
        for i, y in enumerate(remaining):
            if abs(x - y) <= tol:
                del remaining[i]
                break
        else:
            return False
    return True
