"""Driven-dissipative dynamics: Lindblad evolution and steady states.

Density matrices are vectorised by column stacking, so the Liouvillian
``L`` satisfies ``vec(drho/dt) = L @ vec(rho)`` with
``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    InvalidDensityMatrix,
    NoDissipation,
    NonUniqueSteadyState,
    NotConverged,
    PositivityViolation,
    Singular,
)
from .hilbert import basis_ket, build_operator_set, partial_trace_cavity, pure_density
from .measures import concurrence
from .model import hamiltonian_driven
from .numerics import DEFAULT_ATOL, DEFAULT_RTOL, integrate_adaptive, solve_linear

__all__ = [
    "LindbladSpec",
    "lindblad_spec",
    "lindblad_rhs",
    "liouvillian",
    "liouvillian_gap",
    "vec",
    "unvec",
    "evolve_open",
    "two_qubit_concurrence",
    "steady_state",
    "steady_state_by_integration",
    "check_truncation_convergence",
    "default_initial_state",
]


@dataclass(frozen=True)
class LindbladSpec:
    hamiltonian: np.ndarray
    collapse: tuple  # ((rate, operator), ...)

    def __post_init__(self):
        h = np.asarray(self.hamiltonian)
        for rate, op in self.collapse:
            if rate < 0:
                raise ValueError(f"negative rate {rate}")
            if np.shape(op) != h.shape:
                raise DimensionMismatch(f"collapse operator shape {np.shape(op)} != {h.shape}")

    @property
    def dim(self):
        return np.shape(self.hamiltonian)[0]


def lindblad_spec(p):
    """Cavity decay ``kappa`` on ``a`` and qubit decay ``gamma`` on each ``S_i^-``."""
    ops = build_operator_set(p.n_max)
    collapse = ((p.kappa, ops.a), (p.gamma, ops.s_minus[0]), (p.gamma, ops.s_minus[1]))
    return LindbladSpec(hamiltonian_driven(p), collapse)


def lindblad_rhs(spec, rho):
    """``-i[H, rho] + sum_k rate_k (2 A rho A^dag - A^dag A rho - rho A^dag A) / 2``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"rho has shape {rho.shape}, expected {(spec.dim, spec.dim)}")
    h = spec.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for rate, a in spec.collapse:
        if rate == 0:
            continue
        ad = a.conj().T
        ada = ad @ a
        out += rate * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
    return out


def vec(rho):
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim=None):
    v = np.asarray(v)
    dim = int(round(np.sqrt(v.size))) if dim is None else dim
    return v.reshape(dim, dim, order="F")


def liouvillian(spec):
    h = np.asarray(spec.hamiltonian, dtype=complex)
    eye = np.eye(spec.dim)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, a in spec.collapse:
        if rate == 0:
            continue
        ada = a.conj().T @ a
        lv += rate * (np.kron(a.conj(), a) - 0.5 * np.kron(eye, ada) - 0.5 * np.kron(ada.T, eye))
    return lv


def liouvillian_gap(lv, zero_tol=1e-9):
    """Slowest non-zero relaxation rate ``min(-Re lambda)`` of a Liouvillian."""
    rates = -np.linalg.eigvals(lv).real
    nonzero = rates[rates > zero_tol * max(1.0, np.max(np.abs(rates)))]
    if nonzero.size == 0:
        raise NoDissipation("Liouvillian has no decaying modes")
    return float(np.min(nonzero))


def _matrix_rhs(spec):
    # -i(H_eff rho - rho H_eff^dag) + sum_k J_k rho J_k^dag, with
    # H_eff = H - (i/2) sum_k J_k^dag J_k; exact for Hermitian rho.
    jumps = [np.sqrt(rate) * np.asarray(a) for rate, a in spec.collapse if rate > 0]
    h_eff = np.asarray(spec.hamiltonian, dtype=complex)
    for j in jumps:
        h_eff = h_eff - 0.5j * (j.conj().T @ j)
    gen = -1j * h_eff
    pairs = [(j, j.conj().T) for j in jumps]

    def rhs(t, rho):
        x = gen @ rho
        out = x + x.conj().T
        for j, jd in pairs:
            out += j @ rho @ jd
        return out

    return rhs


def _check_state(rho, t):
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-9:
        raise InvalidDensityMatrix(f"Hermiticity lost at t={t:g} (deviation {herm:.2e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-8:
        raise InvalidDensityMatrix(f"trace drifted to {tr!r} at t={t:g}")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam_min < -1e-6:
        raise PositivityViolation(f"eigenvalue {lam_min:.2e} at t={t:g}")


def evolve_open(p, rho0, times, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, spec=None):
    """Integrate the master equation; returns an array of shape ``(len(times), dim, dim)``.

    The right-hand side is evaluated in matrix form, which is the same linear
    map as ``liouvillian(spec)`` acting on ``vec(rho)``. Each returned matrix is checked for Hermiticity, unit trace and
    positivity.
    """
    spec = lindblad_spec(p) if spec is None else spec
    rho0 = np.asarray(rho0, dtype=complex)
    dim = spec.dim
    if rho0.shape != (dim, dim):
        raise DimensionMismatch(f"rho0 has shape {rho0.shape}, expected {(dim, dim)}")
    rhos = integrate_adaptive(_matrix_rhs(spec), rho0, times, rtol=rtol, atol=atol)
    for t, rho in zip(np.asarray(times, dtype=float), rhos):
        _check_state(rho, t)
    return rhos


def two_qubit_concurrence(rhos, n_max):
    """Concurrence of the qubit pair for one or a stack of full-space density matrices."""
    red = partial_trace_cavity(rhos, n_max)
    return concurrence(red, validate=False)


def steady_state(p, check_unique=True, spec=None):
    """Steady state from the Liouvillian null space with a unit-trace constraint.

    The last row of ``L`` is replaced by the trace functional and the system
    ``L' x = e_last`` is solved directly. With ``check_unique`` the singular
    values of ``L`` are inspected first and ``NonUniqueSteadyState`` is raised
    when more than one of them vanishes (relative tolerance 1e-8).
    """
    if spec is None:
        if p.kappa == 0 and p.gamma == 0:
            raise NoDissipation("steady state needs kappa > 0 or gamma > 0")
        spec = lindblad_spec(p)
    elif all(rate == 0 for rate, _ in spec.collapse):
        raise NoDissipation("steady state needs a non-zero collapse rate")
    dim = spec.dim
    lv = liouvillian(spec)
    if check_unique:
        sv = scipy.linalg.svdvals(lv)
        null_dim = int(np.sum(sv <= 1e-8 * sv[0]))
        if null_dim > 1:
            raise NonUniqueSteadyState(f"Liouvillian null space has dimension {null_dim}")

    m = lv.copy()
    m[-1, :] = vec(np.eye(dim))
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[-1] = 1.0
    try:
        x = solve_linear(m, rhs)
    except Singular as exc:
        raise NonUniqueSteadyState(str(exc)) from exc
    residual = np.max(np.abs(lv @ x))
    if residual > 1e-9 * max(1.0, np.max(np.abs(lv))):
        raise NonUniqueSteadyState(f"steady-state residual {residual:.2e} too large")
    rho = unvec(x, dim)
    return 0.5 * (rho + rho.conj().T)


def steady_state_by_integration(p, rho0=None, t_final=None, n_samples=60, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Long-time limit of :func:`evolve_open` as an independent steady-state estimate.

    The default horizon is ``20 / gap``, with ``gap`` the slowest non-zero
    relaxation rate of the Liouvillian, sampled logarithmically.
    """
    spec = lindblad_spec(p)
    if rho0 is None:
        rho0 = default_initial_state(p.n_max)
    if t_final is None:
        t_final = 20.0 / liouvillian_gap(liouvillian(spec))
    times = np.concatenate(([0.0], np.geomspace(1e-2, t_final, n_samples)))
    return evolve_open(p, rho0, times, rtol=rtol, atol=atol, spec=spec)[-1]


def check_truncation_convergence(p, tol=1e-6, n_cap=16):
    """Find a Fock cutoff at which the steady-state concurrence has converged.

    Starting from ``p.n_max``, the concurrence at ``n`` is compared with the
    one at ``n + 2``; ``n`` is doubled until the change is below ``tol``.
    Returns ``(True, n)``. Raises ``NotConverged`` once ``n + 2`` would exceed
    ``n_cap``.
    """

    def conc_at(n):
        q = p.replace(n_max=n)
        return two_qubit_concurrence(steady_state(q, check_unique=False), n)

    n = p.n_max
    cache = {}
    while n + 2 <= n_cap:
        for m in (n, n + 2):
            if m not in cache:
                cache[m] = conc_at(m)
        if abs(cache[n + 2] - cache[n]) < tol:
            return True, n
        n = min(2 * n, n_cap - 2) if n < n_cap - 2 else n_cap
    raise NotConverged(f"steady-state concurrence not converged for n_max up to {n_cap}")


def default_initial_state(n_max):
    return pure_density(basis_ket(0, 0, 1, n_max))

