import numpy as np
import pytest

from symvqe.ansatz import AnsatzSpec, build_subspace_ansatz, initial_parameters
from symvqe.linalg import check_unitary
from symvqe.operators import build_reflection, build_rotation, s2_operator
from symvqe.simulator import basis_state
from symvqe.symmetry import SymmetryError, build_exact_unitary, extract_sector
from symvqe.vqe import method1_prep

SECTORS = [
    ("reflection+", build_reflection(4), 1.0),
    ("reflection-", build_reflection(4), -1.0),
    ("rotation+", build_rotation(4), 1.0),
    ("rotation-", build_rotation(4), -1.0),
    ("s2=0", s2_operator(), 0.0),
]


@pytest.mark.parametrize(
    "op, S, k",
    [(build_reflection(4), -1.0, 6), (build_rotation(4), 1.0, 8), (s2_operator(), 0.0, 3)],
)
def test_sector_dimensions(op, S, k):
    sector = extract_sector(op, S, 1e-6)
    assert sector.dim_k == k
    v = sector.sector_vectors
    assert np.max(np.abs(op @ v - S * v)) <= 1e-9
    assert np.max(np.abs(v.conj().T @ v - np.eye(k))) <= 1e-10


def test_sector_errors():
    with pytest.raises(SymmetryError, match="no eigenvalue"):
        extract_sector(build_reflection(4), 0.5)
    with pytest.raises(SymmetryError, match="greater than 1"):
        extract_sector(s2_operator(), 1.0)


@pytest.mark.parametrize("name, op, S", SECTORS)
def test_exact_unitary_structure(name, op, S):
    sector = extract_sector(op, S)
    u = build_exact_unitary(sector)
    assert check_unitary(u, 1e-10)
    np.testing.assert_array_equal(u[:, -sector.dim_k :], sector.sector_vectors)
    top = u @ basis_state(sector.n_qubits, sector.dim - 1)
    assert np.max(np.abs(op @ top - S * top)) <= 1e-9


@pytest.mark.parametrize("name, op, S", SECTORS)
def test_method1_confinement(name, op, S):
    sector = extract_sector(op, S)
    ansatz = build_subspace_ansatz(AnsatzSpec(sector.n_qubits, sector.dim_k, 2))
    prep = method1_prep(ansatz, build_exact_unitary(sector))
    psi = prep.states(initial_parameters(ansatz, np.random.default_rng(9), 100))
    sq = sector.sq_errors(psi)
    assert sq.max() <= 1e-18
    # the plain quadratic form agrees up to rounding
    quad = np.einsum("ib,ij,jb->b", psi.conj(), sector.penalty(), psi).real
    np.testing.assert_allclose(quad, sq, atol=1e-14)


def test_s2_conjugation_has_zero_tail():
    sector = extract_sector(s2_operator(), 0.0)
    u = build_exact_unitary(sector)
    conj = u.conj().T @ s2_operator() @ u
    assert np.max(np.abs(np.diag(conj)[-3:])) <= 1e-10


def test_exact_unitary_is_deterministic():
    a = build_exact_unitary(extract_sector(build_reflection(4), 1.0))
    b = build_exact_unitary(extract_sector(build_reflection(4).copy(), 1.0))
    assert a.tobytes() == b.tobytes()
