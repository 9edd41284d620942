import numpy as np
import pytest
from conftest import random_density

from cavent.closed import propagate_spectral
from cavent.errors import DimensionMismatch, NoDissipation, NonUniqueSteadyState, NotConverged
from cavent.hilbert import basis_index, basis_ket, build_operator_set, pure_density
from cavent.lindblad import (
    LindbladSpec,
    check_truncation_convergence,
    default_initial_state,
    evolve_open,
    lindblad_rhs,
    lindblad_spec,
    liouvillian,
    liouvillian_gap,
    steady_state,
    steady_state_by_integration,
    two_qubit_concurrence,
    unvec,
    vec,
)
from cavent.model import ModelParams, hamiltonian_full

RES = dict(omega=10.0, eps1=10.0, eps2=10.0)


def driven(**kw):
    base = dict(g2=1.0, d=0.05, Omega_drive=10.0, n_max=4, **RES)
    base.update(kw)
    return ModelParams(**base)


def test_spec_contents():
    spec = lindblad_spec(driven(kappa=0.7, gamma=0.01, n_max=2))
    rates = [rate for rate, _ in spec.collapse]
    assert rates == [0.7, 0.01, 0.01]
    ops = build_operator_set(2)
    assert np.array_equal(spec.collapse[0][1], ops.a)
    assert np.array_equal(spec.collapse[2][1], ops.s_minus[1])


def test_spec_validation():
    with pytest.raises(ValueError):
        LindbladSpec(np.eye(2), ((-1.0, np.eye(2)),))
    with pytest.raises(DimensionMismatch):
        LindbladSpec(np.eye(2), ((1.0, np.eye(3)),))


def test_rhs_trace_and_hermiticity(rng):
    spec = lindblad_spec(driven(n_max=2, g2=0.6))
    for _ in range(5):
        rho = random_density(rng, spec.dim)
        out = lindblad_rhs(spec, rho)
        assert abs(np.trace(out)) <= 1e-12
        assert np.max(np.abs(out - out.conj().T)) <= 1e-12


def test_rhs_vacuum_is_dark():
    spec = lindblad_spec(driven(d=0.0, n_max=2))
    vac = pure_density(basis_ket(0, 0, 0, 2))
    assert np.max(np.abs(lindblad_rhs(spec, vac))) == 0.0


def test_rhs_dimension_check():
    with pytest.raises(DimensionMismatch):
        lindblad_rhs(lindblad_spec(driven(n_max=1)), np.eye(4))


def test_liouvillian_matches_rhs(rng):
    spec = lindblad_spec(driven(n_max=2, g2=0.7))
    lv = liouvillian(spec)
    for _ in range(3):
        rho = random_density(rng, spec.dim)
        assert np.allclose(unvec(lv @ vec(rho)), lindblad_rhs(spec, rho), atol=1e-12)


def test_vec_column_stacking():
    m = np.array([[1, 2], [3, 4]])
    assert np.array_equal(vec(m), [1, 3, 2, 4])
    assert np.array_equal(unvec(vec(m)), m)


def test_evolve_vacuum_stays_put():
    p = driven(d=0.0, n_max=2)
    vac = pure_density(basis_ket(0, 0, 0, 2))
    out = evolve_open(p, vac, np.linspace(0, 50, 6))
    assert np.max(np.abs(out - vac)) <= 1e-14


def test_evolve_hygiene_and_decay():
    p = driven(d=0.0, Omega_drive=0.0, g2=0.4)
    times = np.linspace(0.0, 50.0, 201)
    rhos = evolve_open(p, default_initial_state(4), times)
    assert np.max(np.abs(np.trace(rhos, axis1=1, axis2=2) - 1)) <= 1e-8
    assert np.max(np.abs(rhos - np.swapaxes(rhos, 1, 2).conj())) <= 1e-9
    assert np.min(np.linalg.eigvalsh(rhos)) >= -1e-8
    # without a drive the excitation number commutes with H and can only leak away
    n_exc = np.real(np.einsum("ij,tji->t", build_operator_set(4).excitation_number, rhos))
    assert np.all(np.diff(n_exc) <= 1e-10)
    assert n_exc[-1] < n_exc[0]


def test_intermediate_ratio_entangles_more_early():
    times = np.linspace(0.0, 10.0, 1001)
    first = {}
    for r in (0.4, 1.0):
        p = driven(d=0.0, Omega_drive=0.0, g2=r)
        e = two_qubit_concurrence(evolve_open(p, default_initial_state(4), times), 4)
        first[r] = e.max()
    assert first[0.4] > first[1.0]


def test_no_dissipation_matches_pure_evolution():
    p = ModelParams(g2=0.6, kappa=0.0, gamma=0.0, n_max=2, **RES)
    psi0 = basis_ket(0, 0, 1, 2)
    times = np.linspace(0.0, 20.0, 41)
    rhos = evolve_open(p, pure_density(psi0), times)
    psis = propagate_spectral(hamiltonian_full(p), psi0, times)
    fidelity = np.real(np.einsum("ti,tij,tj->t", psis.conj(), rhos, psis))
    assert fidelity.min() >= 1 - 1e-8
    purity = np.real(np.einsum("tij,tji->t", rhos, rhos))
    assert np.allclose(purity, 1, atol=1e-8)


def test_evolve_rejects_bad_shape():
    with pytest.raises(DimensionMismatch):
        evolve_open(driven(n_max=1), np.eye(4) / 4, [0.0, 1.0])


def test_steady_state_undriven_is_vacuum():
    p = driven(d=0.0)
    ss = steady_state(p)
    assert ss[0, 0].real > 1 - 1e-6
    assert np.trace(ss).real == pytest.approx(1.0, abs=1e-12)


def test_steady_state_residual_and_validity():
    p = driven(g2=0.84)
    ss = steady_state(p)
    lv = liouvillian(lindblad_spec(p))
    assert np.max(np.abs(lv @ vec(ss))) <= 1e-9
    assert np.min(np.linalg.eigvalsh(ss)) >= -1e-10
    assert np.trace(ss).real == pytest.approx(1.0, abs=1e-12)


def test_steady_state_agrees_with_long_evolution():
    p = driven()
    times = np.concatenate(([0.0], np.geomspace(1e-2, 2000.0, 40)))
    late = evolve_open(p, default_initial_state(4), times)[-1]
    assert np.max(np.abs(late - steady_state(p))) <= 1e-6


def test_steady_state_by_integration_agrees():
    p = driven(g2=0.5, d=0.08)
    assert np.max(np.abs(steady_state_by_integration(p) - steady_state(p))) <= 1e-6


def test_steady_state_errors():
    with pytest.raises(NoDissipation):
        steady_state(driven(kappa=0.0, gamma=0.0))
    # qubit 2 decoupled and undamped: its populations never relax
    with pytest.raises(NonUniqueSteadyState):
        steady_state(driven(g2=0.0, gamma=0.0, d=0.0, n_max=1))
    spec = LindbladSpec(np.eye(2), ((0.0, np.eye(2)),))
    with pytest.raises(NoDissipation):
        steady_state(None, spec=spec)


def test_liouvillian_gap_positive():
    gap = liouvillian_gap(liouvillian(lindblad_spec(driven(n_max=2))))
    assert 0 < gap < 1.0
    with pytest.raises(NoDissipation):
        liouvillian_gap(np.zeros((4, 4)))


def test_truncation_convergence():
    assert check_truncation_convergence(driven(d=0.0, n_max=1)) == (True, 1)
    assert check_truncation_convergence(driven(d=0.05, n_max=1)) == (True, 4)
    _, n_strong = check_truncation_convergence(driven(d=0.5, n_max=1))
    assert n_strong > 4
    with pytest.raises(NotConverged):
        check_truncation_convergence(driven(d=0.5, n_max=1), n_cap=6)


def test_two_qubit_concurrence_shapes():
    rho = default_initial_state(2)
    assert two_qubit_concurrence(rho, 2) == 0.0
    assert two_qubit_concurrence(np.array([rho, rho]), 2).shape == (2,)
    psi = (basis_ket(1, 0, 0, 2) + basis_ket(0, 0, 1, 2)) / np.sqrt(2)
    assert two_qubit_concurrence(pure_density(psi), 2) == pytest.approx(1.0)
    assert default_initial_state(3)[basis_index(0, 0, 1, 3), basis_index(0, 0, 1, 3)] == 1.0
