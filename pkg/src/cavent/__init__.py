"""Two qubits coupled through a lossy cavity: closed and driven-dissipative entanglement dynamics."""

__version__ = "0.1.0"

from . import closed, errors, experiments, hilbert, lindblad, measures, model, numerics  # noqa: E402
from .closed import ClosedDynamics, entanglement_peak, mes_lapse_analytic  # noqa: E402
from .lindblad import evolve_open, steady_state  # noqa: E402
from .measures import concurrence  # noqa: E402
from .model import ModelParams, analytic_eigensystem  # noqa: E402

# the driven-dissipative module is also reachable under its short name
open_system = lindblad

__all__ = [
    "__version__",
    "closed",
    "errors",
    "experiments",
    "hilbert",
    "lindblad",
    "open_system",
    "measures",
    "model",
    "numerics",
    "ClosedDynamics",
    "ModelParams",
    "analytic_eigensystem",
    "concurrence",
    "entanglement_peak",
    "evolve_open",
    "mes_lapse_analytic",
    "steady_state",
]
