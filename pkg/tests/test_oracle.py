import numpy as np
import pytest

from symvqe.operators import (
    build_reflection,
    build_rotation,
    build_xxz,
    h2_hamiltonian,
    pauli_dense,
    s2_operator,
)
from symvqe.oracle import (
    OracleError,
    fidelity,
    is_submultiset,
    manifold_fidelity,
    subspace_ground,
)
from symvqe.simulator import basis_state
from symvqe.symmetry import extract_sector

H_XXZ = pauli_dense(build_xxz(4, 1.0, 3.0))

PAIRINGS = [
    (H_XXZ, build_reflection(4), 1.0),
    (H_XXZ, build_reflection(4), -1.0),
    (H_XXZ, build_rotation(4), 1.0),
    (H_XXZ, build_rotation(4), -1.0),
    (h2_hamiltonian(), s2_operator(), 0.0),
]


def test_h2_singlet_sector_holds_global_ground():
    o = subspace_ground(h2_hamiltonian(), extract_sector(s2_operator(), 0.0))
    # independent route: restrict with LAPACK in a hand-picked basis of the S^2 = 0 space
    basis = np.array([[1, 0, 0, 1], [0, np.sqrt(2), 0, 0], [0, 0, np.sqrt(2), 0]]).T / np.sqrt(2)
    ref = np.linalg.eigvalsh(basis.T @ h2_hamiltonian().real @ basis)[0]
    assert o.sector_ground_energy == pytest.approx(ref, abs=1e-12)
    assert o.sector_ground_energy == pytest.approx(-1.860, abs=5e-4)
    assert o.full_ground_energy == pytest.approx(o.sector_ground_energy, abs=1e-12)
    assert o.ground_in_sector


def test_rotation_sectors_partition_the_spectrum():
    lows = [subspace_ground(H_XXZ, extract_sector(build_rotation(4), s)) for s in (1.0, -1.0)]
    assert min(o.sector_ground_energy for o in lows) == pytest.approx(lows[0].full_ground_energy, abs=1e-10)
    merged = np.sort(np.concatenate([o.sector_spectrum for o in lows]))
    np.testing.assert_allclose(merged, np.linalg.eigvalsh(H_XXZ), atol=1e-9)


def test_identity_hamiltonian():
    o = subspace_ground(np.eye(16), extract_sector(build_reflection(4), -1.0))
    assert o.sector_ground_energy == pytest.approx(1.0)


@pytest.mark.parametrize("h, op, S", PAIRINGS)
def test_oracle_invariants(h, op, S):
    sector = extract_sector(op, S)
    o = subspace_ground(h, sector)
    assert o.sector_ground_energy >= o.full_ground_energy - 1e-9
    assert is_submultiset(o.sector_spectrum, o.full_spectrum, 1e-9)
    g = o.sector_ground_state
    assert np.vdot(g, sector.penalty() @ g).real <= 1e-18
    assert np.vdot(g, h @ g).real == pytest.approx(o.sector_ground_energy, abs=1e-10)


def test_non_commuting_pair_is_rejected():
    with pytest.raises(OracleError, match="commute"):
        subspace_ground(H_XXZ, extract_sector(np.diag(np.arange(16.0) % 3), 1.0))


def test_fidelity():
    a = basis_state(2, 1)
    assert fidelity(a, a) == 1.0
    assert fidelity(a, basis_state(2, 2)) == 0.0
    assert fidelity(np.exp(0.7j) * a, a) == pytest.approx(1.0, abs=1e-15)


def test_manifold_fidelity_reduces_to_vector_fidelity():
    rng = np.random.default_rng(0)
    ref = rng.normal(size=8) + 1j * rng.normal(size=8)
    ref /= np.linalg.norm(ref)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    assert manifold_fidelity(psi, ref[:, None]) == pytest.approx(fidelity(psi, ref), abs=1e-14)
    # a two-dimensional manifold captures any state inside it completely
    q, _ = np.linalg.qr(rng.normal(size=(8, 2)))
    inside = q @ np.array([0.6, 0.8])
    assert manifold_fidelity(inside, q) == pytest.approx(1.0, abs=1e-14)


def test_submultiset():
    assert is_submultiset([1, 1], [1, 2, 1])
    assert not is_submultiset([1, 1], [1, 2])
