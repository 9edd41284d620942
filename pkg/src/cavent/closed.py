"""Closed-system propagation and the dispersive maximally-entangled-state analytics."""

from dataclasses import dataclass

import numpy as np

from .errors import NonUniformCoupling, ZeroDetuning
from .hilbert import basis_index, basis_ket, build_operator_set, extract_single_excitation
from .measures import (
    TimeSeries,
    coherence_single_excitation,
    concurrence_single_excitation,
    golden_max,
    peak_value,
)
from .model import hamiltonian_full
from .numerics import hermitian_eig

__all__ = [
    "SpectralPropagator",
    "propagate_spectral",
    "EffectiveEvolution",
    "effective_evolution",
    "MesAnalytics",
    "mes_threshold_ratio",
    "mes_times_uniform",
    "mes_lapse_analytic",
    "theta_period",
    "dispersive_horizon",
    "sample_step",
    "ClosedDynamics",
    "entanglement_peak",
    "first_mes_time",
]


class SpectralPropagator:
    """Exact evolution ``psi(t) = V exp(-i E t) V^dag psi0`` for a fixed Hamiltonian."""

    def __init__(self, h, psi0):
        psi0 = np.asarray(psi0, dtype=complex)
        if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
            raise ValueError("initial state must be normalised")
        self.energies, self.vectors = hermitian_eig(h)
        self.coeffs = self.vectors.conj().T @ psi0
        # eigencomponents with exactly zero weight never contribute
        self._live = np.flatnonzero(self.coeffs != 0)

    def __call__(self, times, rows=None):
        """States at ``times``; ``rows`` optionally selects basis components."""
        times = np.asarray(times, dtype=float)
        live = self._live
        vecs = self.vectors[:, live] if rows is None else self.vectors[np.ix_(rows, live)]
        phases = np.exp(-1j * np.multiply.outer(times, self.energies[live]))
        return (phases * self.coeffs[live]) @ vecs.T

    def populated_energies(self, cutoff=1e-12):
        return self.energies[np.abs(self.coeffs) ** 2 > cutoff]


def propagate_spectral(h, psi0, times):
    """States at each of ``times`` as rows of a ``(len(times), dim)`` array."""
    return SpectralPropagator(h, psi0)(times)


@dataclass(frozen=True)
class EffectiveEvolution:
    t: object
    amp01: object
    amp10: object

    @property
    def concurrence(self):
        return 2.0 * np.abs(self.amp01 * self.amp10)


def _require_detuning(p):
    if p.delta == 0:
        raise ZeroDetuning("dispersive analytics need eps1 != omega")


def effective_evolution(p, t):
    """Two-qubit state grown from ``|01>`` under the effective flip-flop Hamiltonian.

    ``t`` may be a scalar or an array. The global Stark phase is dropped.
    """
    _require_detuning(p)
    t = np.asarray(t, dtype=float)
    s = p.g1**2 + p.g2**2
    x = np.exp(-1j * t * s / p.delta) - 1.0
    return EffectiveEvolution(t=t, amp01=1.0 + (p.g2**2 / s) * x, amp10=(p.g1 * p.g2 / s) * x)


def mes_threshold_ratio():
    """Smallest ``g2/g1`` (on the ``<= 1`` branch) for which a maximally entangled state occurs."""
    return float(np.sqrt(3.0 - 2.0 * np.sqrt(2.0)))


def theta_period(p):
    """Time for the flip-flop phase ``(g1^2 + g2^2) t / |delta|`` to advance by 2 pi."""
    _require_detuning(p)
    return 2 * np.pi * abs(p.delta) / (p.g1**2 + p.g2**2)


def dispersive_horizon(p, periods=3):
    return periods * theta_period(p)


def mes_times_uniform(p, n):
    """``(2n+1) pi |delta| / (4 g1^2)``, the n-th entangling time for ``g1 == g2``."""
    if not np.isclose(p.g1, p.g2, rtol=1e-12, atol=0.0):
        raise NonUniformCoupling("uniform MES times need g1 == g2")
    _require_detuning(p)
    return (2 * n + 1) * np.pi * abs(p.delta) / (4 * p.g1**2)


@dataclass(frozen=True)
class MesAnalytics:
    ratio: float
    cos_theta: float
    theta: object
    period_Theta: float
    mes_lapse_P: object
    threshold_ok: bool

    def mes_times(self, n_periods=1):
        """MES instants in the first ``n_periods`` periods, at phases ``pi -+ theta``."""
        if not self.threshold_ok:
            return np.array([])
        base = np.array([np.pi - self.theta, np.pi + self.theta]) / (2 * np.pi)
        ts = [(k + base) * self.period_Theta for k in range(n_periods)]
        return np.unique(np.concatenate(ts))


def mes_lapse_analytic(p):
    _require_detuning(p)
    g1, g2 = p.g1, p.g2
    cos_theta = np.inf if g2 == 0 else (g1**2 - g2**2) ** 2 / (4 * g1**2 * g2**2)
    ok = bool(cos_theta <= 1.0)
    theta = lapse = None
    if ok:
        theta = float(np.arccos(cos_theta))
        lapse = 2 * theta * abs(p.delta) / (g1**2 + g2**2)
    return MesAnalytics(
        ratio=g2 / g1,
        cos_theta=float(cos_theta),
        theta=theta,
        period_Theta=float(theta_period(p)),
        mes_lapse_P=lapse,
        threshold_ok=ok,
    )


def sample_step(energies, horizon, per_period=100, min_samples=2000):
    """Sampling step ``min(2 pi / (per_period * spread), horizon / min_samples)``.

    ``spread`` is the range of the populated energies, so the fastest
    oscillation present in the dynamics is resolved.
    """
    energies = np.asarray(energies, dtype=float)
    spread = float(np.ptp(energies)) if energies.size > 1 else 0.0
    dt = horizon / min_samples
    if spread > 0:
        dt = min(dt, 2 * np.pi / (per_period * spread))
    return dt


class ClosedDynamics:
    """Exact dynamics from ``|001>`` (or a given ket) under the bare Hamiltonian.

    Observables are evaluated lazily on any time array; entanglement and
    coherence use the pure single-excitation forms, valid because the bare
    Hamiltonian never leaves that subspace.
    """

    def __init__(self, p, psi0=None):
        self.params = p
        if psi0 is None:
            psi0 = basis_ket(0, 0, 1, p.n_max)
        self.propagator = SpectralPropagator(hamiltonian_full(p), psi0)
        n = p.n_max
        self._rows = [basis_index(1, 0, 0, n), basis_index(0, 1, 0, n), basis_index(0, 0, 1, n)]

    def states(self, times):
        return self.propagator(times)

    def amplitudes(self, times):
        """``(alpha, beta, gamma)`` on ``|100>, |010>, |001>``; shape ``(..., 3)``."""
        return self.propagator(np.atleast_1d(times), rows=self._rows)

    def leak(self, times):
        _, leak = extract_single_excitation(self.states(np.atleast_1d(times)), self.params.n_max)
        return leak

    def concurrence(self, times):
        a = self.amplitudes(times)
        out = concurrence_single_excitation(a[..., 0], a[..., 2])
        return out if np.ndim(times) else float(out[0])

    def coherence(self, times):
        a = self.amplitudes(times)
        out = coherence_single_excitation(a[..., 0], a[..., 2])
        return out if np.ndim(times) else float(out[0])

    def sz(self, times, which):
        ops = build_operator_set(self.params.n_max)
        diag = np.real(np.diag(ops.s_z[which - 1]))
        psi = self.states(np.atleast_1d(times))
        return np.abs(psi) ** 2 @ diag

    def ripple_period(self):
        """Period of the fastest oscillation present, ``2 pi / spread``."""
        e = self.propagator.populated_energies()
        spread = float(np.ptp(e)) if e.size > 1 else 0.0
        return 2 * np.pi / spread if spread > 0 else None

    def default_step(self, horizon):
        return sample_step(self.propagator.populated_energies(), horizon)

    def time_grid(self, horizon, dt=None):
        dt = self.default_step(horizon) if dt is None else dt
        n = int(np.ceil(horizon / dt)) + 1
        return np.linspace(0.0, horizon, n)

    def series(self, quantity, horizon, dt=None, chunk=200_000):
        """Sampled :class:`TimeSeries` of ``"concurrence"`` or ``"coherence"`` with a refining evaluator."""
        fn = {"concurrence": self.concurrence, "coherence": self.coherence}[quantity]
        t = self.time_grid(horizon, dt)
        v = np.concatenate([fn(t[i : i + chunk]) for i in range(0, t.size, chunk)])
        return TimeSeries(t, v, label=quantity, evaluator=fn)


def entanglement_peak(p, horizon=None, dt=None):
    """Peak concurrence and coherence of the exact dynamics from ``|001>``.

    Returns ``(E_p, t_peak, C_p)``. The default horizon is three periods of
    the flip-flop phase (dispersive) or ``60 / g1`` when on resonance.
    """
    if horizon is None:
        horizon = dispersive_horizon(p) if p.delta != 0 else 60.0 / p.g1
    dyn = ClosedDynamics(p)
    t = dyn.time_grid(horizon, dt)
    chunk = 200_000
    amps = np.concatenate([dyn.amplitudes(t[i : i + chunk]) for i in range(0, t.size, chunk)])
    e = concurrence_single_excitation(amps[:, 0], amps[:, 2])
    # coherence is exactly half the concurrence for these states, but is
    # refined on its own evaluator to keep the two readouts independent
    e_p, t_p = peak_value(TimeSeries(t, e, "concurrence", dyn.concurrence))
    c_p, _ = peak_value(TimeSeries(t, 0.5 * e, "coherence", dyn.coherence))
    return e_p, t_p, c_p


def first_mes_time(series, tol=1e-3):
    """First refined local maximum of ``series`` reaching ``1 - tol``, or ``None``."""
    v = series.values
    level = 1.0 - tol
    margin = float(np.max(np.abs(np.diff(v)))) if v.size > 1 else 0.0
    ev = series.evaluator
    t = series.times
    for i in range(1, v.size - 1):
        if v[i] >= v[i - 1] and v[i] >= v[i + 1] and v[i] >= level - margin:
            if ev is None:
                if v[i] >= level:
                    return float(t[i])
                continue
            x, fx = golden_max(lambda s: float(ev(s)), t[i - 1], t[i + 1])
            if max(fx, v[i]) >= level:
                return float(x if fx >= v[i] else t[i])
    return None
