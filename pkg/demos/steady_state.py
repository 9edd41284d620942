"""Driven, lossy cavity: steady-state entanglement against ratio and drive.

Resonant qubits (omega = eps = Omega = 10), kappa = 1, gamma = 0.005. The
Fock cutoff is picked per point so that the steady state has converged.

    python demos/steady_state.py
"""
import numpy as np

from cavent import ModelParams
from cavent.lindblad import check_truncation_convergence, steady_state, two_qubit_concurrence


def e_ss(r, d):
    p = ModelParams(g2=r, d=d, omega=10.0, eps1=10.0, eps2=10.0, Omega_drive=10.0, kappa=1.0, gamma=0.005)
    _, n = check_truncation_convergence(p)
    p = p.replace(n_max=n)
    return two_qubit_concurrence(steady_state(p), n), n


print("ratio sweep at d=0.05")
for r in np.round(np.arange(0.5, 1.0001, 0.1), 2):
    e, n = e_ss(r, 0.05)
    print(f"  r={r:3.1f}  E_ss={e:.4f}  (n_max={n})")

print("drive sweep at r=1")
for d in (0.01, 0.025, 0.05, 0.1, 0.2):
    e, n = e_ss(1.0, d)
    print(f"  d={d:5.3f}  E_ss={e:.4f}  (n_max={n})")
