"""Entanglement and coherence measures, expectation values and peak finding."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptySeries, InvalidDensityMatrix, SubspaceLeak
from .hilbert import build_operator_set, extract_single_excitation, n_max_from_dim

__all__ = [
    "TimeSeries",
    "validate_density_matrix",
    "concurrence",
    "concurrence_single_excitation",
    "coherence_offdiag",
    "coherence_single_excitation",
    "expectation_sz",
    "eigenstate_overlaps",
    "golden_max",
    "peak_value",
    "mes_lapse_numeric",
]

_SIGMA_Y2 = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""
    evaluator: object = field(default=None, repr=False, compare=False)
    """Optional ``f(t) -> value`` used to refine peaks between samples."""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d and of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return self.times.size


def validate_density_matrix(rho, dim=None, herm_tol=1e-8, trace_tol=1e-8, pos_tol=1e-8):
    """Raise ``InvalidDensityMatrix`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensityMatrix(f"expected a square matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise InvalidDensityMatrix(f"expected a {dim}x{dim} matrix, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise InvalidDensityMatrix(f"not Hermitian (deviation {herm:.2e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise InvalidDensityMatrix(f"trace {tr!r} differs from 1")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam_min < -pos_tol:
        raise InvalidDensityMatrix(f"negative eigenvalue {lam_min:.2e}")
    return rho


def _wootters(rho):
    # With rho = W W^dag, the lambda_i (square roots of the spectrum of
    # rho @ rho_tilde) are the singular values of W^T (sy x sy) W. This avoids
    # square roots of round-off sized eigenvalues. Works on stacks (..., 4, 4).
    p, u = np.linalg.eigh(0.5 * (rho + np.swapaxes(rho, -1, -2).conj()))
    w = u * np.sqrt(np.clip(p, 0.0, None))[..., None, :]
    lam = np.linalg.svd(np.swapaxes(w, -1, -2) @ _SIGMA_Y2 @ w, compute_uv=False)
    return np.maximum(0.0, lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3])


def concurrence(rho2q, validate=True):
    """Wootters concurrence of a two-qubit density matrix.

    The ``lambda_i`` are the square roots of the eigenvalues of
    ``rho @ rho_tilde`` in decreasing order. They are obtained as singular
    values of a factorised form, and round-off negative eigenvalues of
    ``rho`` are clamped to zero.
    A stack of matrices ``(..., 4, 4)`` is accepted when ``validate`` is
    false.
    """
    rho2q = np.asarray(rho2q, dtype=complex)
    if validate:
        validate_density_matrix(rho2q, dim=4)
    c = _wootters(rho2q)
    return float(c) if np.ndim(c) == 0 else c


def concurrence_single_excitation(alpha, gamma):
    """Concurrence ``2|alpha gamma|`` of the reduced state of ``alpha|100> + beta|010> + gamma|001>``."""
    return 2.0 * np.abs(np.asarray(alpha) * np.asarray(gamma))


def coherence_offdiag(rho2q, validate=True):
    """Largest off-diagonal magnitude of the two-qubit density matrix."""
    rho2q = np.asarray(rho2q, dtype=complex)
    if validate:
        validate_density_matrix(rho2q, dim=4)
    iu = np.triu_indices(4, k=1)
    c = np.max(np.abs(rho2q[..., iu[0], iu[1]]), axis=-1)
    return float(c) if np.ndim(c) == 0 else c


def coherence_single_excitation(alpha, gamma):
    return np.abs(np.asarray(alpha) * np.asarray(gamma))


def expectation_sz(state, which):
    """``<S^z>`` of qubit ``which`` (1 or 2) for a full-space ket or density matrix."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    state = np.asarray(state, dtype=complex)
    if state.ndim not in (1, 2) or (state.ndim == 2 and state.shape[0] != state.shape[1]):
        raise DimensionMismatch(f"unsupported state shape {state.shape}")
    n_max = n_max_from_dim(state.shape[0])
    sz = build_operator_set(n_max).s_z[which - 1]
    if state.ndim == 1:
        return float(np.real(state.conj() @ sz @ state))
    return float(np.real(np.trace(sz @ state)))


def eigenstate_overlaps(psi, es, leak_tol=1e-8):
    """Populations ``|<E_k|psi>|^2`` on the three single-excitation eigenstates.

    ``psi`` is a full-space ket, or a stack of kets ``(..., dim)``.
    """
    psi = np.asarray(psi, dtype=complex)
    n_max = n_max_from_dim(psi.shape[-1])
    amps, leak = extract_single_excitation(psi, n_max)
    if psi.ndim == 1:
        amps = amps.as_array()
    if np.max(leak) > leak_tol:
        raise SubspaceLeak(f"state leaks {np.max(leak):.2e} out of the single-excitation subspace")
    return np.abs(amps @ es.vectors.conj()) ** 2


_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, a, b, tol=1e-10, max_iter=200):
    """Golden-section search for a maximum of ``f`` on ``[a, b]``.

    Returns ``(x, f(x))``.
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _refine(series, i, evaluator, tol):
    t, v = series.times, series.values
    if evaluator is None or len(t) < 2:
        return t[i], v[i]
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, len(t) - 1)]
    x, fx = golden_max(lambda s: float(evaluator(s)), lo, hi, tol=tol)
    if fx > v[i]:
        return x, fx
    return t[i], v[i]


def peak_value(series, evaluator=None, tol=1e-10):
    """Global maximum of a sampled series, refined between samples.

    Returns ``(peak, t_peak)``. If ``evaluator`` (or ``series.evaluator``)
    is given, the best sample is refined by golden-section search within its
    neighbouring samples.
    """
    if len(series) == 0:
        raise EmptySeries("cannot take the peak of an empty series")
    evaluator = evaluator if evaluator is not None else series.evaluator
    i = int(np.argmax(series.values))
    t_peak, peak = _refine(series, i, evaluator, tol)
    return float(peak), float(t_peak)


def _local_maxima(v):
    n = v.size
    if n == 1:
        return np.array([0])
    left = np.concatenate(([True], v[1:] > v[:-1]))
    right = np.concatenate((v[:-1] >= v[1:], [True]))
    return np.flatnonzero(left & right)


def _boxcar(v, k):
    """Centred moving average over ``k`` samples; NaN where the window overhangs."""
    out = np.full(v.size, np.nan)
    if k > v.size:
        return out
    c = np.concatenate(([0.0], np.cumsum(v)))
    h = k // 2
    out[h : v.size - (k - 1 - h)] = (c[k:] - c[:-k]) / k
    return out


def mes_lapse_numeric(series, tol=1e-3, evaluator=None, ripple_period=None, dip_tol=None):
    """Shortest time between consecutive maximally entangled instants.

    A maximally entangled instant is a refined local maximum with value at
    least ``1 - tol``. Fast small-amplitude ripples can put several such
    maxima on one event. Two maxima therefore count as separate events only
    if the series dips by more than ``dip_tol`` (default ``tol / 2``) between
    them, measured on a copy averaged over ``ripple_period`` (one ripple
    period cancels the ripple). The highest maximum represents each event.
    Returns ``None`` when fewer than two events occur.
    """
    if not 0 < tol <= 0.1:
        raise ValueError("tol must lie in (0, 0.1]")
    dip_tol = 0.5 * tol if dip_tol is None else dip_tol
    if len(series) == 0:
        return None
    evaluator = evaluator if evaluator is not None else series.evaluator
    t, v = series.times, series.values
    k = 1
    if ripple_period is not None and len(series) > 1:
        steps = np.diff(t)
        if np.ptp(steps) > 1e-9 * steps[0]:
            raise ValueError("smoothing needs a uniform time grid")
        k = max(1, int(round(ripple_period / steps[0])))
    smooth = _boxcar(v, k)
    level = 1.0 - tol
    margin = float(np.max(np.abs(np.diff(v)))) if v.size > 1 else 0.0

    events = []  # (time, value, sample index)
    for i in _local_maxima(v):
        if v[i] < level - margin:
            continue
        t_i, v_i = _refine(series, i, evaluator, 1e-10)
        if v_i < level:
            continue
        if events:
            j = events[-1][2]
            seg = smooth[j : i + 1]
            if not np.all(np.isfinite(seg)) or min(smooth[i], smooth[j]) - np.min(seg) <= dip_tol:
                if v_i > events[-1][1]:
                    events[-1] = (t_i, v_i, i)
                continue
        events.append((t_i, v_i, i))
    if len(events) < 2:
        return None
    times = np.array([e[0] for e in events])
    return float(np.min(np.diff(times)))
