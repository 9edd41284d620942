"""Composite Hilbert space of two qubits and one truncated cavity mode.

Tensor order is (qubit 1, cavity, qubit 2), so a ket ``|q1 n q2>`` maps to
the basis index ``q1*(n_max+1)*2 + n*2 + q2`` with ``q = 1`` meaning the
qubit is excited.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .numerics import kron

__all__ = [
    "OperatorSet",
    "SubspaceState",
    "basis_index",
    "full_dim",
    "n_max_from_dim",
    "build_operator_set",
    "basis_ket",
    "embed_single_excitation",
    "extract_single_excitation",
    "pure_density",
    "partial_trace_cavity",
]

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SPIN_Z = np.diag([-0.5, 0.5]).astype(complex)


def full_dim(n_max):
    return 2 * (n_max + 1) * 2


def n_max_from_dim(dim):
    if dim % 4 or dim < 8:
        raise DimensionMismatch(f"dimension {dim} is not 4*(n_max+1) with n_max >= 1")
    return dim // 4 - 1


def basis_index(q1, n, q2, n_max):
    if q1 not in (0, 1) or q2 not in (0, 1) or not 0 <= n <= n_max:
        raise ValueError(f"invalid basis label |{q1},{n},{q2}> for n_max={n_max}")
    return q1 * (n_max + 1) * 2 + n * 2 + q2


def basis_ket(q1, n, q2, n_max):
    psi = np.zeros(full_dim(n_max), dtype=complex)
    psi[basis_index(q1, n, q2, n_max)] = 1.0
    return psi


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class OperatorSet:
    """Ladder and spin operators on the truncated composite space.

    ``s_plus[0]`` acts on qubit 1 and ``s_plus[1]`` on qubit 2; the same
    holds for ``s_minus`` and ``s_z``.
    """

    n_max: int
    a: np.ndarray
    a_dag: np.ndarray
    s_plus: tuple
    s_minus: tuple
    s_z: tuple
    identity: np.ndarray

    @property
    def dim(self):
        return full_dim(self.n_max)

    @property
    def number(self):
        return self.a_dag @ self.a

    @property
    def excitation_number(self):
        """``a^dag a + S1^z + S2^z``; conserved by the undriven Hamiltonian."""
        return self.number + self.s_z[0] + self.s_z[1]


def build_operator_set(n_max):
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max}")
    n_max = int(n_max)
    nc = n_max + 1
    i2 = np.eye(2)
    ic = np.eye(nc)
    a_cav = np.diag(np.sqrt(np.arange(1, nc)), 1).astype(complex)

    a = kron(i2, a_cav, i2)
    sm1 = kron(SIGMA_MINUS, ic, i2)
    sm2 = kron(i2, ic, SIGMA_MINUS)
    sz1 = kron(SPIN_Z, ic, i2)
    sz2 = kron(i2, ic, SPIN_Z)
    return OperatorSet(
        n_max=n_max,
        a=_frozen(a),
        a_dag=_frozen(a.conj().T),
        s_plus=(_frozen(sm1.conj().T), _frozen(sm2.conj().T)),
        s_minus=(_frozen(sm1), _frozen(sm2)),
        s_z=(_frozen(sz1), _frozen(sz2)),
        identity=_frozen(np.eye(full_dim(n_max))),
    )


@dataclass(frozen=True)
class SubspaceState:
    """Amplitudes on ``|100>``, ``|010>``, ``|001>``."""

    alpha: complex
    beta: complex
    gamma: complex

    def as_array(self):
        return np.array([self.alpha, self.beta, self.gamma], dtype=complex)

    def norm(self):
        return float(np.linalg.norm(self.as_array()))

    def normalized(self):
        return SubspaceState(*(self.as_array() / self.norm()))

    @classmethod
    def from_array(cls, v):
        v = np.asarray(v, dtype=complex)
        return cls(complex(v[0]), complex(v[1]), complex(v[2]))


def _subspace_indices(n_max):
    return [basis_index(1, 0, 0, n_max), basis_index(0, 1, 0, n_max), basis_index(0, 0, 1, n_max)]


def embed_single_excitation(s, n_max):
    psi = np.zeros(full_dim(n_max), dtype=complex)
    psi[_subspace_indices(n_max)] = s.as_array()
    return psi


def extract_single_excitation(psi, n_max):
    """Inverse of :func:`embed_single_excitation`.

    Returns ``(state, leak)`` where ``leak`` is the norm of the part of
    ``psi`` outside the single-excitation subspace. Accepts stacked vectors
    of shape ``(..., dim)``, in which case ``state`` is an ``(..., 3)`` array.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] != full_dim(n_max):
        raise DimensionMismatch(f"vector length {psi.shape[-1]} != {full_dim(n_max)}")
    idx = _subspace_indices(n_max)
    amps = psi[..., idx]
    rest = np.delete(psi, idx, axis=-1)
    leak = np.linalg.norm(rest, axis=-1)
    if psi.ndim == 1:
        return SubspaceState.from_array(amps), float(leak)
    return amps, leak


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex)
    return psi[..., :, None] * psi[..., None, :].conj()


def partial_trace_cavity(rho_full, n_max):
    """Trace out the cavity, leaving a 4x4 matrix on ``|q1 q2>``.

    The two-qubit basis order is ``|00>, |01>, |10>, |11>``. Stacked inputs
    of shape ``(..., dim, dim)`` are reduced element-wise.
    """
    rho_full = np.asarray(rho_full)
    dim = full_dim(n_max)
    if rho_full.shape[-2:] != (dim, dim):
        raise DimensionMismatch(f"expected trailing shape ({dim}, {dim}), got {rho_full.shape}")
    lead = rho_full.shape[:-2]
    t = rho_full.reshape(lead + (2, n_max + 1, 2, 2, n_max + 1, 2))
    red = np.einsum("...anbcnd->...abcd", t)
    return red.reshape(lead + (4, 4))
