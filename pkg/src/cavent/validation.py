"""Quick invariant checks behind ``cavent validate``.

Each check draws a few random parameter sets and compares two independent
routes to the same quantity. ``run_checks`` yields ``(name, ok, detail)``.
"""

import numpy as np

from .closed import ClosedDynamics
from .hilbert import basis_ket, extract_single_excitation, partial_trace_cavity, pure_density
from .lindblad import evolve_open, lindblad_rhs, lindblad_spec, liouvillian, steady_state, unvec, vec
from .measures import concurrence, concurrence_single_excitation
from .model import ModelParams, analytic_eigensystem, hamiltonian_full, single_excitation_block
from .numerics import hermitian_eig, is_hermitian


def _random_params(rng, **fixed):
    kw = dict(
        g1=1.0,
        g2=float(rng.uniform(0.05, 1.5)),
        omega=float(rng.uniform(0.0, 60.0)),
        eps1=float(rng.uniform(0.0, 20.0)),
        eps2=None,
    )
    kw["eps2"] = kw["eps1"]
    kw.update(fixed)
    return ModelParams(**kw)


def check_eigensystem(rng, draws=50):
    worst_val = worst_vec = 0.0
    for _ in range(draws):
        p = _random_params(rng)
        es = analytic_eigensystem(p)
        w, v = hermitian_eig(single_excitation_block(p))
        worst_val = max(worst_val, np.max(np.abs(np.sort(es.energies) - w)))
        # phase-free comparison through projectors
        for k in range(3):
            a = es.vectors[:, k]
            j = int(np.argmin(np.abs(w - es.energies[k])))
            b = v[:, j]
            worst_vec = max(worst_vec, np.max(np.abs(np.outer(a, a.conj()) - np.outer(b, b.conj()))))
    ok = worst_val <= 1e-9 and worst_vec <= 1e-8
    return ok, f"max |dE| = {worst_val:.2e}, max projector diff = {worst_vec:.2e}"


def check_hermitian(rng, draws=20):
    ok = all(is_hermitian(hamiltonian_full(_random_params(rng, n_max=int(rng.integers(1, 4))))) for _ in range(draws))
    return ok, f"{draws} bare Hamiltonians"


def check_concurrence(rng, draws=200):
    worst = 0.0
    for _ in range(draws):
        amps = rng.normal(size=3) + 1j * rng.normal(size=3)
        amps /= np.linalg.norm(amps)
        psi = amps[0] * basis_ket(1, 0, 0, 1) + amps[1] * basis_ket(0, 1, 0, 1) + amps[2] * basis_ket(0, 0, 1, 1)
        red = partial_trace_cavity(pure_density(psi), 1)
        worst = max(worst, abs(concurrence(red) - concurrence_single_excitation(amps[0], amps[2])))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def check_subspace(rng):
    p = _random_params(rng, n_max=3)
    dyn = ClosedDynamics(p)
    _, leak = extract_single_excitation(dyn.states(np.linspace(0, 50, 201)), p.n_max)
    return float(np.max(leak)) <= 1e-12, f"max leak {np.max(leak):.2e}"


def check_liouvillian(rng):
    p = _random_params(rng, omega=10.0, eps1=10.0, eps2=10.0, d=float(rng.uniform(0, 0.2)), Omega_drive=10.0, n_max=2)
    spec = lindblad_spec(p)
    x = rng.normal(size=(spec.dim, spec.dim)) + 1j * rng.normal(size=(spec.dim, spec.dim))
    rho = x @ x.conj().T
    rho /= np.trace(rho)
    diff = np.max(np.abs(unvec(liouvillian(spec) @ vec(rho), spec.dim) - lindblad_rhs(spec, rho)))
    return diff <= 1e-10, f"superoperator vs direct action {diff:.2e}"


def check_open_evolution(rng):
    p = _random_params(rng, omega=10.0, eps1=10.0, eps2=10.0, d=0.05, Omega_drive=10.0, n_max=2)
    rho0 = pure_density(basis_ket(0, 0, 1, p.n_max))
    # evolve_open raises on any trace, Hermiticity or positivity violation
    evolve_open(p, rho0, np.linspace(0.0, 20.0, 41))
    ss = steady_state(p)
    tr = abs(np.trace(ss) - 1)
    lam = np.linalg.eigvalsh(ss)[0]
    return tr <= 1e-10 and lam >= -1e-10, f"steady-state trace error {tr:.2e}, min eigenvalue {lam:.2e}"


CHECKS = [
    ("eigensystem", check_eigensystem),
    ("hermitian", check_hermitian),
    ("concurrence", check_concurrence),
    ("subspace", check_subspace),
    ("liouvillian", check_liouvillian),
    ("open-evolution", check_open_evolution),
]


def run_checks(rng=None):
    rng = np.random.default_rng(0) if rng is None else rng
    for name, fn in CHECKS:
        ok, detail = fn(rng)
        yield name, bool(ok), detail
