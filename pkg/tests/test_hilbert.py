import numpy as np
import pytest
from conftest import random_density

from cavent.errors import DimensionMismatch
from cavent.hilbert import (
    SubspaceState,
    basis_index,
    basis_ket,
    build_operator_set,
    embed_single_excitation,
    extract_single_excitation,
    full_dim,
    n_max_from_dim,
    partial_trace_cavity,
    pure_density,
)


def comm(a, b):
    return a @ b - b @ a


def test_dimension():
    assert build_operator_set(1).dim == 8
    assert full_dim(4) == 20
    assert n_max_from_dim(20) == 4
    with pytest.raises(DimensionMismatch):
        n_max_from_dim(6)


def test_basis_index_layout():
    assert basis_index(0, 0, 0, 1) == 0
    assert basis_index(0, 0, 1, 1) == 1
    assert basis_index(0, 1, 0, 1) == 2
    assert basis_index(1, 0, 0, 1) == 4
    assert basis_index(1, 3, 1, 3) == 1 * 4 * 2 + 3 * 2 + 1
    with pytest.raises(ValueError):
        basis_index(0, 2, 0, 1)


def test_sz_qubit1_diagonal():
    n_max = 2
    ops = build_operator_set(n_max)
    diag = np.real(np.diag(ops.s_z[0]))
    for q1 in (0, 1):
        for n in range(n_max + 1):
            for q2 in (0, 1):
                assert diag[basis_index(q1, n, q2, n_max)] == (0.5 if q1 else -0.5)


def test_number_operator_on_subspace():
    ops = build_operator_set(1)
    k010 = basis_ket(0, 1, 0, 1)
    k001 = basis_ket(0, 0, 1, 1)
    assert np.array_equal(ops.number @ k010, k010)
    assert np.array_equal(ops.number @ k001, 0 * k001)


@pytest.mark.parametrize("n_max", [1, 3])
def test_operator_relations(n_max):
    ops = build_operator_set(n_max)
    assert np.array_equal(ops.a_dag, ops.a.conj().T)
    for i in range(2):
        assert np.array_equal(ops.s_plus[i], ops.s_minus[i].conj().T)
        assert set(np.round(np.linalg.eigvalsh(ops.s_z[i]), 12)) == {-0.5, 0.5}
    # [a, a^dag] = 1 except on the top Fock level
    c = comm(ops.a, ops.a_dag)
    top = [basis_index(q1, n_max, q2, n_max) for q1 in (0, 1) for q2 in (0, 1)]
    keep = [k for k in range(ops.dim) if k not in top]
    assert np.allclose(c[np.ix_(keep, keep)], np.eye(len(keep)), rtol=0, atol=1e-14)


@pytest.mark.parametrize("n_max", [1, 2])
def test_spin_algebra_exact(n_max):
    ops = build_operator_set(n_max)
    for i in range(2):
        for j in range(2):
            expected = ops.s_z[i] if i == j else 0 * ops.s_z[i]
            # S^+ S^- - S^- S^+ = 2 S^z for spin one-half
            assert np.array_equal(comm(ops.s_plus[i], ops.s_minus[j]), 2 * expected)
            zp = ops.s_plus[j] if i == j else 0 * ops.s_plus[j]
            assert np.array_equal(comm(ops.s_z[i], ops.s_plus[j]), zp)
            assert np.array_equal(comm(ops.s_z[i], ops.s_minus[j]), -1 * (ops.s_minus[j] if i == j else 0 * zp))


def test_operator_set_immutable():
    ops = build_operator_set(1)
    with pytest.raises(ValueError):
        ops.a[0, 0] = 1.0


def test_embed_and_extract():
    psi = embed_single_excitation(SubspaceState(0, 0, 1), 1)
    assert np.array_equal(psi, basis_ket(0, 0, 1, 1))
    s, leak = extract_single_excitation(embed_single_excitation(SubspaceState(1, 0, 0), 3), 3)
    assert s == SubspaceState(1, 0, 0)
    assert leak == 0.0


def test_extract_reports_leak():
    psi = (basis_ket(0, 0, 1, 1) + basis_ket(1, 1, 0, 1)) / np.sqrt(2)
    s, leak = extract_single_excitation(psi, 1)
    assert leak == pytest.approx(1 / np.sqrt(2))
    assert s.norm() == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(DimensionMismatch):
        extract_single_excitation(psi, 2)


def test_extract_stacked():
    stack = np.array([basis_ket(1, 0, 0, 1), basis_ket(0, 1, 0, 1)])
    amps, leak = extract_single_excitation(stack, 1)
    assert amps.shape == (2, 3)
    assert np.array_equal(amps[1], [0, 1, 0])
    assert np.array_equal(leak, [0, 0])


def test_subspace_state_normalized():
    s = SubspaceState(3, 0, 4).normalized()
    assert s.norm() == pytest.approx(1.0, abs=1e-15)
    assert SubspaceState.from_array(s.as_array()) == s


def test_partial_trace_product():
    red = partial_trace_cavity(pure_density(basis_ket(0, 0, 1, 1)), 1)
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.array_equal(red, expected)


def test_partial_trace_bell():
    psi = (basis_ket(1, 0, 0, 2) + basis_ket(0, 0, 1, 2)) / np.sqrt(2)
    red = partial_trace_cavity(pure_density(psi), 2)
    phi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    assert np.allclose(red, np.outer(phi, phi), atol=1e-15)


def test_partial_trace_cavity_population():
    a, b, g = 0.5, 1 / np.sqrt(2), 0.5j
    psi = embed_single_excitation(SubspaceState(a, b, g), 1)
    red = partial_trace_cavity(pure_density(psi), 1)
    assert red[0, 0].real == pytest.approx(abs(b) ** 2)
    assert red[2, 1] == pytest.approx(a * np.conj(g))


@pytest.mark.parametrize("n_max", [1, 2, 4])
def test_partial_trace_preserves_trace_and_positivity(rng, n_max):
    for _ in range(10):
        rho = random_density(rng, full_dim(n_max), rank=int(rng.integers(1, 4)))
        red = partial_trace_cavity(rho, n_max)
        assert abs(np.trace(red) - np.trace(rho)) <= 1e-12
        assert np.min(np.linalg.eigvalsh(red)) >= -1e-10


def test_partial_trace_stacked_matches_single(rng):
    rhos = np.array([random_density(rng, 12) for _ in range(3)])
    stacked = partial_trace_cavity(rhos, 2)
    for k in range(3):
        assert np.array_equal(stacked[k], partial_trace_cavity(rhos[k], 2))


def test_partial_trace_shape_check():
    with pytest.raises(DimensionMismatch):
        partial_trace_cavity(np.eye(8), 2)
