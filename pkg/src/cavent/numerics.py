"""Dense complex linear algebra and an adaptive Runge-Kutta integrator.

Matrices and vectors are plain ``numpy`` arrays with ``complex128`` dtype.
Every physics module goes through the helpers here so that tolerance checks
(hermiticity, singularity, step underflow) live in one place.
"""

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import NotHermitian, Singular, StepUnderflow

__all__ = [
    "kron",
    "is_hermitian",
    "is_unitary",
    "hermitian_eig",
    "solve_linear",
    "integrate_adaptive",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
]

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


def kron(*ops):
    """Tensor product of one or more matrices, left operand most significant."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op))
    return out


def is_hermitian(a, tol=1e-10):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_unitary(a, tol=1e-10):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(a.conj().T @ a - eye), initial=0.0) <= tol)


def hermitian_eig(a, tol=1e-10):
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(w, v)`` with real eigenvalues ``w`` in ascending order and
    orthonormal eigenvectors in the columns of ``v``.

    Raises
    ------
    NotHermitian
        If ``a`` differs from its conjugate transpose by more than ``tol``.
    """
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, tol):
        raise NotHermitian(f"matrix is not Hermitian within {tol:g}")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w, v


def solve_linear(a, b, rcond_tol=1e-14):
    """Solve ``a @ x = b`` by LU factorisation.

    ``Singular`` is raised when the LAPACK 1-norm reciprocal condition
    estimate falls below ``rcond_tol``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"rhs length {b.shape[0]} does not match matrix size {a.shape[0]}")
    anorm = np.linalg.norm(a, 1)
    if anorm == 0.0:
        raise Singular("matrix is identically zero")
    lu, piv, info = lapack.zgetrf(a)
    if info > 0:
        raise Singular(f"exactly singular: zero pivot at position {info}")
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    if rcond < rcond_tol:
        raise Singular(f"reciprocal condition number {rcond:.3e} below {rcond_tol:g}")
    return scipy.linalg.lu_solve((lu, piv), b)


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
# Difference between the 5th and embedded 4th order weights.
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_A_NZ = [[(j, a) for j, a in enumerate(row) if a != 0.0] for row in _A]
_E_NZ = [(j, e) for j, e in enumerate(_E) if e != 0.0]

# PI step-size controller constants (Hairer, Norsett & Wanner, II.4).
_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


def _error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((np.abs(y0) / scale) ** 2))
    d1 = np.sqrt(np.mean((np.abs(f0) / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean((np.abs(f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate_adaptive(rhs, y0, t_grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, max_steps=10_000_000):
    """Integrate ``y' = rhs(t, y)`` and return the state at each grid time.

    Dormand-Prince 5(4) with a PI step controller and step rejection. Steps
    are shortened to land exactly on grid times, so the output is
    reproducible bit-for-bit for identical inputs.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y)`` returning an array shaped like ``y``.
    y0 : array_like
        Initial state at ``t_grid[0]``; real or complex, any shape.
    t_grid : sequence of float
        Strictly increasing output times.

    Returns
    -------
    ndarray
        Array of shape ``(len(t_grid),) + y0.shape``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if not (rtol > 0 and atol > 0):
        raise ValueError("rtol and atol must be positive")

    y = np.array(y0, dtype=np.result_type(np.asarray(y0), float), copy=True)
    out = np.empty((t_grid.size,) + y.shape, dtype=y.dtype)
    out[0] = y
    if t_grid.size == 1:
        return out

    t = float(t_grid[0])
    span = float(t_grid[-1] - t_grid[0])
    h_min = 1e-14 * span
    f = np.asarray(rhs(t, y))
    h = _initial_step(rhs, t, y, f, rtol, atol, span)
    err_old = 1e-4
    k = [None] * 7
    steps = 0

    for idx in range(1, t_grid.size):
        t_target = float(t_grid[idx])
        while t < t_target:
            if h < h_min:
                raise StepUnderflow(f"step size {h:.3e} underflowed at t={t:.6g}")
            steps += 1
            if steps > max_steps:
                raise StepUnderflow(f"exceeded {max_steps} steps at t={t:.6g}")
            remaining = t_target - t
            landing = h >= remaining * (1 - 1e-12)
            h_step = remaining if landing else h

            k[0] = f
            for s in range(1, 7):
                ys = y.copy()
                for j, a in _A_NZ[s]:
                    ys += (h_step * a) * k[j]
                k[s] = np.asarray(rhs(t + _C[s] * h_step, ys))
            y_new = ys  # stage 7 is evaluated at the 5th order solution (FSAL)
            err_vec = (h_step * _E_NZ[0][1]) * k[_E_NZ[0][0]]
            for j, e in _E_NZ[1:]:
                err_vec += (h_step * e) * k[j]
            err = _error_norm(err_vec, y, y_new, rtol, atol)

            fac_err = err ** _EXPO if err > 0 else 0.0
            if err <= 1.0:
                if err > 0:
                    fac = fac_err / err_old ** _BETA / _SAFETY
                    fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac))
                    h_next = h_step / fac
                else:
                    h_next = h_step * _FAC_MAX
                err_old = max(err, 1e-4)
                t = t_target if landing else t + h_step
                y = y_new
                f = k[6]
                # a clipped landing step should not shrink the natural step
                h = max(h_next, h) if landing else h_next
            else:
                h = h_step / min(1 / _FAC_MIN, fac_err / _SAFETY)
        out[idx] = y
    return out
