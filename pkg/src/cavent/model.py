"""Model parameters, Hamiltonians and the closed-form single-excitation spectrum.

Energies are measured in units of ``g1`` (and times in ``1/g1``), with
hbar = 1. Qubit energies couple through spin-1/2 operators ``S^z`` with
eigenvalues +-1/2.
"""

from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DegenerateRatio, UnequalEpsilons, ZeroDetuning
from .hilbert import SubspaceState, basis_index, build_operator_set
from .numerics import kron

__all__ = [
    "ModelParams",
    "EigenSystem",
    "hamiltonian_full",
    "hamiltonian_driven",
    "hamiltonian_effective",
    "hamiltonian_effective_qubits",
    "single_excitation_block",
    "analytic_eigensystem",
]


@dataclass(frozen=True)
class ModelParams:
    g1: float = 1.0
    g2: float = 1.0
    omega: float = 50.0
    eps1: float = 10.0
    eps2: float = 10.0
    kappa: float = 1.0
    gamma: float = 0.005
    d: float = 0.0
    Omega_drive: float = 0.0
    n_max: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
        if self.g1 <= 0:
            raise ValueError("g1 must be positive")
        if self.g2 < 0:
            raise ValueError("g2 must be non-negative")
        if self.kappa < 0 or self.gamma < 0 or self.d < 0:
            raise ValueError("kappa, gamma and d must be non-negative")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError("n_max must be an integer >= 1")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def delta(self):
        """Signed qubit-cavity detuning ``eps1 - omega``."""
        return self.eps1 - self.omega

    @property
    def ratio(self):
        return self.g2 / self.g1

    def with_ratio(self, r):
        return replace(self, g2=r * self.g1)

    def replace(self, **changes):
        return replace(self, **changes)


def _coupling(p, ops):
    g = (p.g1, p.g2)
    h = np.zeros((ops.dim, ops.dim), dtype=complex)
    for i in range(2):
        term = ops.a_dag @ ops.s_minus[i]
        h += g[i] * (term + term.conj().T)
    return h


def hamiltonian_full(p):
    """``omega a^dag a + sum eps_i S_i^z + sum g_i (a^dag S_i^- + h.c.)``."""
    ops = build_operator_set(p.n_max)
    return p.omega * ops.number + p.eps1 * ops.s_z[0] + p.eps2 * ops.s_z[1] + _coupling(p, ops)


def hamiltonian_driven(p):
    """Hamiltonian in the frame rotating at ``Omega_drive`` with qubit 2 driven at strength ``d``."""
    ops = build_operator_set(p.n_max)
    w = p.Omega_drive
    h = (p.omega - w) * ops.number + (p.eps1 - w) * ops.s_z[0] + (p.eps2 - w) * ops.s_z[1]
    h = h + _coupling(p, ops)
    if p.d:
        h = h + p.d * (ops.s_plus[1] + ops.s_minus[1])
    return h


def _require_detuning(p):
    if p.delta == 0:
        raise ZeroDetuning("effective Hamiltonian needs eps1 != omega")


def hamiltonian_effective(p):
    """Second-order dispersive Hamiltonian on the full truncated space.

    Contains the photon-dependent Stark shift and the cavity-mediated
    flip-flop. The flip-flop sums over ordered pairs ``i != j``, so its
    matrix element between ``|100>`` and ``|001>`` is ``g1 g2 / delta``.
    """
    _require_detuning(p)
    ops = build_operator_set(p.n_max)
    delta = p.delta
    g = (p.g1, p.g2)
    h = p.omega * ops.number + p.eps1 * ops.s_z[0] + p.eps2 * ops.s_z[1]
    photon = ops.a_dag @ ops.a + ops.a @ ops.a_dag
    for i in range(2):
        h = h + (g[i] ** 2 / delta) * photon @ ops.s_z[i]
    flip = ops.s_plus[0] @ ops.s_minus[1] + ops.s_minus[0] @ ops.s_plus[1]
    return h + (p.g1 * p.g2 / delta) * flip


def hamiltonian_effective_qubits(p):
    """Two-qubit reduction of :func:`hamiltonian_effective` for an empty cavity.

    Basis order ``|00>, |01>, |10>, |11>`` (qubit 1 first).
    """
    _require_detuning(p)
    if p.eps1 != p.eps2:
        raise UnequalEpsilons("two-qubit effective Hamiltonian assumes eps1 == eps2")
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    sz = np.diag([-0.5, 0.5]).astype(complex)
    i2 = np.eye(2)
    sz1, sz2 = kron(sz, i2), kron(i2, sz)
    sm1, sm2 = kron(sm, i2), kron(i2, sm)
    flip = sm1.conj().T @ sm2 + sm1 @ sm2.conj().T
    delta = p.delta
    return (p.g1**2 / delta) * sz1 + (p.g2**2 / delta) * sz2 + (p.g1 * p.g2 / delta) * flip


def single_excitation_block(p, h=None):
    """3x3 block of ``h`` (default: the bare Hamiltonian) on ``|100>, |010>, |001>``."""
    if h is None:
        h = hamiltonian_full(p)
    idx = [basis_index(1, 0, 0, p.n_max), basis_index(0, 1, 0, p.n_max), basis_index(0, 0, 1, p.n_max)]
    return np.asarray(h)[np.ix_(idx, idx)]


@dataclass(frozen=True)
class EigenSystem:
    e1: float
    e2: float
    e3: float
    v1: SubspaceState
    v2: SubspaceState
    v3: SubspaceState

    @property
    def energies(self):
        return np.array([self.e1, self.e2, self.e3])

    @property
    def vectors(self):
        """Eigenvectors as the columns of a 3x3 array."""
        return np.column_stack([v.as_array() for v in (self.v1, self.v2, self.v3)])


def analytic_eigensystem(p):
    """Closed-form eigenpairs of the single-excitation block for ``eps1 == eps2``.

    Vectors are normalised; ``v1`` is the dark state with no photon component.
    """
    if p.eps1 != p.eps2:
        raise UnequalEpsilons("closed-form spectrum assumes eps1 == eps2")
    if p.g2 == 0:
        raise DegenerateRatio("closed-form eigenvectors divide by g2")
    g1, g2, w, e = p.g1, p.g2, p.omega, p.eps1
    s = g1**2 + g2**2
    u = w - e
    root = np.sqrt(e**2 + 4 * s - 2 * e * w + w**2)
    # root - u and root + u, each evaluated without cancellation
    if u >= 0:
        plus = root + u
        minus = 4 * s / plus
    else:
        minus = root - u
        plus = 4 * s / minus
    e2 = -0.5 * minus
    e3 = 0.5 * plus
    v1 = np.array([-g2 / g1, 0.0, 1.0])
    v2 = np.array([g1 / g2, -minus / (2 * g2), 1.0])
    v3 = np.array([g1 / g2, plus / (2 * g2), 1.0])
    vs = [SubspaceState.from_array(v / np.linalg.norm(v)) for v in (v1, v2, v3)]
    return EigenSystem(0.0, float(e2), float(e3), *vs)
