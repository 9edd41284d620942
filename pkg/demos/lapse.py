"""Spacing between successive maximally entangled states, numeric vs closed form.

The numeric lapse comes from the exact three-level dynamics; the closed form
comes from the effective flip-flop model. They agree to a fraction of a
percent over the range where the lapse is defined.

    python demos/lapse.py
"""
import numpy as np

from cavent import ClosedDynamics, ModelParams, mes_lapse_analytic
from cavent.measures import mes_lapse_numeric

for r in np.round(np.arange(0.45, 1.0001, 0.05), 2):
    p = ModelParams(g2=r, omega=50.0, eps1=10.0, eps2=10.0)
    an = mes_lapse_analytic(p)
    dyn = ClosedDynamics(p)
    series = dyn.series("concurrence", 3 * an.period_Theta)
    num = mes_lapse_numeric(series, 1e-3, ripple_period=dyn.ripple_period())
    err = abs(num - an.mes_lapse_P) / an.mes_lapse_P
    print(f"r={r:4.2f}  cos(theta)={an.cos_theta:.4f}  P={an.mes_lapse_P:8.3f}  numeric={num:8.3f}  rel.err={err:.2e}")
