"""Peak entanglement of the two qubits as the coupling ratio g2/g1 is swept.

Far detuned cavity (omega=50, eps=10), one excitation that starts on qubit 2.
Below r* = sqrt(3 - 2 sqrt 2) the pair never reaches a maximally entangled
state; above it the peak concurrence sits at one.

    python demos/threshold_sweep.py [--plot out.png]
"""
import argparse

import numpy as np

from cavent import ModelParams, entanglement_peak
from cavent.closed import mes_threshold_ratio


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", help="write a PNG (needs matplotlib)")
    args = ap.parse_args()

    ratios = np.round(np.arange(0.05, 1.0001, 0.05), 2)
    peaks = []
    for r in ratios:
        e_p, t_p, _ = entanglement_peak(ModelParams(g2=r, omega=50.0, eps1=10.0, eps2=10.0))
        peaks.append(e_p)
        print(f"r={r:4.2f}  E_peak={e_p:.6f}  at t={t_p:9.2f}")
    print(f"threshold ratio r* = {mes_threshold_ratio():.6f}")

    if args.plot:
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(ratios, peaks, "o-")
        ax.axvline(mes_threshold_ratio(), ls="--", c="gray")
        ax.set_xlabel("g2/g1")
        ax.set_ylabel("peak concurrence")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
