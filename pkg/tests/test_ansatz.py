import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symvqe.ansatz import (
    AnsatzError,
    AnsatzSpec,
    build_layered_circuit,
    build_subspace_ansatz,
    initial_parameters,
)
from symvqe.simulator import GateKind, apply_circuit, basis_state, circuit_unitary

CNOT_CHAIN_CACHE = {}


def cnot_chain_matrix(n, ring=False):
    """Dense matrix of CNOT(0,1) CNOT(1,2) ... applied in that order, then CNOT(n-1,0) for a ring."""
    dim = 2**n
    pairs = [(q, q + 1) for q in range(n - 1)]
    if ring and n > 2:
        pairs.append((n - 1, 0))
    total = np.eye(dim)
    for c, t in pairs:
        m = np.zeros((dim, dim))
        for i in range(dim):
            j = i ^ (1 << t) if (i >> c) & 1 else i
            m[j, i] = 1
        total = m @ total
    return total


def leaked_weight(spec, params):
    c = build_subspace_ansatz(spec)
    psi = apply_circuit(c, params, basis_state(spec.n_qubits, 0))
    low = 2**spec.n_qubits - spec.k
    return np.sum(np.abs(psi[:low]) ** 2, axis=0)


@pytest.mark.parametrize("n, depth, count", [(2, 1, 8), (4, 5, 48), (3, 2, 18)])
def test_layered_parameter_count(n, depth, count):
    assert build_layered_circuit(n, depth).n_params == count == 2 * n * depth + 2 * n


@pytest.mark.parametrize("n, depth", [(2, 1), (3, 2), (4, 5)])
@pytest.mark.parametrize("entangler", ["chain", "ring"])
def test_layered_zero_parameters_is_cnot_layer_power(n, depth, entangler):
    c = build_layered_circuit(n, depth, entangler=entangler)
    u = circuit_unitary(c, np.zeros(c.n_params))
    expected = np.linalg.matrix_power(cnot_chain_matrix(n, entangler == "ring"), depth)
    np.testing.assert_allclose(u, expected, atol=1e-15)


def test_ring_matches_chain_parameter_count_and_rejects_unknown_layout():
    assert build_layered_circuit(4, 5, entangler="ring").n_params == 48
    with pytest.raises(AnsatzError, match="entangler"):
        build_layered_circuit(4, 1, entangler="star")


def test_layered_uses_only_ry_rx_for_parameters():
    c = build_layered_circuit(4, 3)
    assert {g.kind for g in c.gates if g.param} == {GateKind.RY, GateKind.RX}


@pytest.mark.parametrize(
    "n, k, support",
    [(4, 8, range(8, 16)), (2, 3, range(1, 4)), (4, 6, range(10, 16))],
)
def test_support_on_last_k_labels(n, k, support):
    spec = AnsatzSpec(n, k, 2)
    c = build_subspace_ansatz(spec)
    rng = np.random.default_rng(k)
    psi = apply_circuit(c, initial_parameters(c, rng, 100), basis_state(n, 0))
    outside = [i for i in range(2**n) if i not in support]
    assert np.sum(np.abs(psi[outside]) ** 2, axis=0).max() < 1e-20


def test_non_power_of_two_uses_permutation():
    kinds = [g.kind for g in build_subspace_ansatz(AnsatzSpec(2, 3, 1)).gates]
    assert GateKind.PERMUTATION in kinds


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 4).flatmap(
        lambda n: st.tuples(st.just(n), st.integers(2, 2**n), st.integers(1, 3))
    ),
    st.integers(0, 2**32 - 1),
)
def test_support_invariant_property(nkd, seed):
    n, k, depth = nkd
    spec = AnsatzSpec(n, k, depth)
    c = build_subspace_ansatz(spec)
    params = initial_parameters(c, np.random.default_rng(seed), 100)
    assert leaked_weight(spec, params).max() < 1e-20


@pytest.mark.parametrize("n, k", [(2, 2), (2, 3), (2, 4), (3, 5), (3, 6), (3, 7), (4, 6), (4, 8), (4, 3)])
def test_surjective_on_last_k_labels(n, k):
    c = build_subspace_ansatz(AnsatzSpec(n, k, 2))
    psi = apply_circuit(c, initial_parameters(c, np.random.default_rng(0), 3000), basis_state(n, 0))
    best = (np.abs(psi) ** 2).max(axis=1)
    assert np.all(best[2**n - k :] > 0.5)


def test_spec_validation():
    with pytest.raises(AnsatzError, match="greater than 1"):
        AnsatzSpec(4, 1)
    with pytest.raises(AnsatzError):
        AnsatzSpec(2, 5)
    with pytest.raises(AnsatzError):
        AnsatzSpec(2, 3, depth=0)


def test_initial_parameters_in_period():
    c = build_layered_circuit(3, 2)
    p = initial_parameters(c, np.random.default_rng(1), 50)
    assert p.shape == (50, c.n_params)
    assert p.min() >= 0 and p.max() < 2 * np.pi
