"""Named scenarios that regenerate every figure-level dataset as CSV.

Each scenario resolves a flat configuration (global defaults, then the
scenario's own defaults, then an optional ``key=value`` file, then
command-line overrides), evaluates its parameter points and writes one or
more CSV files. Output bytes depend only on the resolved configuration.
"""

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .closed import (
    ClosedDynamics,
    dispersive_horizon,
    entanglement_peak,
    mes_lapse_analytic,
    theta_period,
)
from .errors import InvalidOverride, UnknownScenario
from .lindblad import (
    check_truncation_convergence,
    default_initial_state,
    evolve_open,
    steady_state,
    two_qubit_concurrence,
)
from .measures import eigenstate_overlaps, mes_lapse_numeric
from .model import ModelParams, analytic_eigensystem

__all__ = [
    "Scenario",
    "SweepResult",
    "Dataset",
    "CONFIG_KEYS",
    "resolve_config",
    "parse_overrides",
    "read_config_file",
    "model_params",
    "ratio_grid",
    "drive_grid",
    "run_scenario",
    "list_scenarios",
    "get_scenario",
    "format_csv",
    "SCENARIOS",
]

# key -> (type, default). Lists are comma separated on input.
CONFIG_KEYS = {
    "g2_over_g1": (float, 1.0),
    "omega": (float, 50.0),
    "eps1": (float, 10.0),
    "eps2": (float, 10.0),
    "kappa": (float, 1.0),
    "gamma": (float, 0.005),
    "d": (float, 0.0),
    "Omega_drive": (float, 0.0),
    "n_max": (int, 1),
    "rtol": (float, 1e-9),
    "atol": (float, 1e-12),
    "t_max": (float, 0.0),
    "sample_count": (int, 2001),
    "r_min": (float, 0.05),
    "r_max": (float, 1.0),
    "r_step": (float, 0.01),
    "d_min": (float, 0.005),
    "d_max": (float, 0.2),
    "d_step": (float, 0.005),
    "ratios": (list, ()),
    "drives": (list, ()),
    "lapse_tol": (float, 1e-3),
    "seed": (int, 0),
    "out_dir": (str, ""),
}
# Shorthand keys that expand to several real keys.
ALIASES = {"eps": ("eps1", "eps2")}

_RESONANT = {"omega": 10.0, "eps1": 10.0, "eps2": 10.0}
_OPEN = {**_RESONANT, "n_max": 4, "kappa": 1.0, "gamma": 0.005}


def _parse_value(key, text):
    kind = CONFIG_KEYS[key][0]
    try:
        if kind is str:
            return text
        if kind is list:
            values = tuple(float(x) for x in text.split(",") if x.strip())
            if not values:
                raise ValueError("empty list")
        elif kind is int:
            as_float = float(text)
            if as_float != int(as_float):
                raise ValueError("not an integer")
            values = (int(as_float),)
        else:
            values = (float(text),)
    except ValueError as exc:
        raise InvalidOverride(f"bad value for {key}: {text!r} ({exc})") from None
    if not all(math.isfinite(v) for v in values):
        raise InvalidOverride(f"value for {key} must be finite: {text!r}")
    return values if kind is list else values[0]


def parse_overrides(items):
    """Parse ``key=value`` strings into an ordered list of ``(key, raw_text)``."""
    parsed = []
    for item in items:
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise InvalidOverride(f"override must look like key=value, got {item!r}")
        if key not in CONFIG_KEYS and key not in ALIASES:
            raise InvalidOverride(f"unknown config key {key!r}")
        parsed.append((key, value))
    return parsed


def read_config_file(path):
    """Read a plain ``key=value`` file; blank lines and ``#`` comments are skipped."""
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return parse_overrides(lines)


def resolve_config(scenario_defaults=None, file_overrides=(), cli_overrides=()):
    """Merge defaults and overrides; later sources win.

    Returns ``(config, applied)`` where ``applied`` lists the raw override
    strings in the order they took effect.
    """
    cfg = {k: v[1] for k, v in CONFIG_KEYS.items()}
    cfg.update(scenario_defaults or {})
    applied = []
    for key, text in list(file_overrides) + list(cli_overrides):
        targets = ALIASES.get(key, (key,))
        for target in targets:
            cfg[target] = _parse_value(target, text)
        applied.append(f"{key}={text}")
    if not cfg["out_dir"]:
        cfg["out_dir"] = os.environ.get("CAVENT_OUT_DIR", "out")
    return cfg, applied


def model_params(cfg, ratio=None, **changes):
    values = dict(
        g1=1.0,
        g2=cfg["g2_over_g1"] if ratio is None else ratio,
        omega=cfg["omega"],
        eps1=cfg["eps1"],
        eps2=cfg["eps2"],
        kappa=cfg["kappa"],
        gamma=cfg["gamma"],
        d=cfg["d"],
        Omega_drive=cfg["Omega_drive"],
        n_max=cfg["n_max"],
    )
    values.update(changes)
    try:
        return ModelParams(**values)
    except ValueError as exc:
        raise InvalidOverride(str(exc)) from None


def _grid(lo, hi, step, name):
    if step <= 0 or hi < lo:
        raise InvalidOverride(f"{name} grid needs step > 0 and max >= min")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def ratio_grid(cfg):
    return _grid(cfg["r_min"], cfg["r_max"], cfg["r_step"], "ratio")


def drive_grid(cfg):
    return _grid(cfg["d_min"], cfg["d_max"], cfg["d_step"], "drive")


def _map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class SweepResult:
    grid: np.ndarray
    metrics: dict

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        for name, vals in self.metrics.items():
            if len(vals) != len(self.grid):
                raise ValueError(f"metric {name} has {len(vals)} values for {len(self.grid)} grid points")


@dataclass
class Dataset:
    suffix: str
    columns: list
    rows: np.ndarray
    extra_header: dict = field(default_factory=dict)

    def check(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(f"dataset {self.suffix!r}: {rows.shape} does not match columns {self.columns}")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError(f"dataset {self.suffix!r}: duplicate column names")
        if np.any(np.isinf(rows)):
            raise ValueError(f"dataset {self.suffix!r}: infinite values")
        return rows


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict
    runner: object
    outputs: tuple  # documented column layouts, one string per dataset


def _label(x):
    return f"{x:g}"


def _time_grid(t_max, count):
    return np.linspace(0.0, t_max, count)


def _auto_horizon(cfg, fallback):
    return cfg["t_max"] if cfg["t_max"] > 0 else fallback


# scenario runners ---------------------------------------------------------


def _eigvec_coeff_sweep(cfg, threads):
    grid = ratio_grid(cfg)

    def point(r, c=cfg):
        es = analytic_eigensystem(model_params(c, r))
        coeffs = np.abs(es.vectors).T.reshape(-1)  # v1(100,010,001), v2(...), v3(...)
        return [r, es.e1, es.e2, es.e3, *coeffs]

    cols = ["r", "e1", "e2", "e3"]
    cols += [f"v{k}_{ket}" for k in (1, 2, 3) for ket in ("100", "010", "001")]
    disp = Dataset("dispersive", cols, np.array(_map(point, grid, threads)))
    # resonant variant: cavity tuned to qubit 1
    res_cfg = {**cfg, "omega": cfg["eps1"]}
    res = Dataset("resonant", cols, np.array(_map(lambda r: point(r, res_cfg), grid, threads)))
    return [disp, res]


def _overlap_dynamics(cfg, threads):
    out = []
    disp = model_params(cfg)
    res = model_params(cfg, omega=cfg["eps1"])
    for suffix, p in (("dispersive", disp), ("resonant", res)):
        fallback = 2 * theta_period(p) if p.delta != 0 else 20.0
        t = _time_grid(_auto_horizon(cfg, fallback), cfg["sample_count"])
        dyn = ClosedDynamics(p)
        ov = eigenstate_overlaps(dyn.states(t), analytic_eigensystem(p))
        out.append(Dataset(suffix, ["t", "overlap_E1", "overlap_E2", "overlap_E3"], np.column_stack([t, ov])))
    return out


def _ratios(cfg, default):
    return cfg["ratios"] if cfg["ratios"] else default


def _dynamics_table(cfg, ratios, fallback, columns_for, threads):
    t = _time_grid(_auto_horizon(cfg, fallback), cfg["sample_count"])
    cols = ["t"]
    for r in ratios:
        cols += columns_for(r)[0]
    blocks = _map(lambda r: columns_for(r)[1](t), ratios, threads)
    return t, cols, np.column_stack([t, *blocks])


def _dispersive_dynamics(cfg, threads):
    ratios = _ratios(cfg, (1.0, 0.2, 0.1))
    fallback = 2 * max(theta_period(model_params(cfg, r)) for r in ratios)

    def columns_for(r):
        return [f"E_r{_label(r)}"], lambda t: ClosedDynamics(model_params(cfg, r)).concurrence(t)

    _, cols, rows = _dynamics_table(cfg, ratios, fallback, columns_for, threads)
    return [Dataset("", cols, rows)]


def _dispersive_peak_sweep(cfg, threads):
    grid = ratio_grid(cfg)

    def point(r):
        p = model_params(cfg, r)
        e_p, t_p, c_p = entanglement_peak(p, horizon=_auto_horizon(cfg, dispersive_horizon(p)))
        return [r, e_p, t_p, c_p]

    return [Dataset("", ["r", "E_p", "t_peak", "C_p"], np.array(_map(point, grid, threads)))]


def _mes_lapse(cfg, threads):
    ratios = _ratios(cfg, (0.8, 0.6))
    fallback = 2 * max(theta_period(model_params(cfg, r)) for r in ratios)

    def columns_for(r):
        return [f"E_r{_label(r)}"], lambda t: ClosedDynamics(model_params(cfg, r)).concurrence(t)

    _, cols, rows = _dynamics_table(cfg, ratios, fallback, columns_for, threads)

    def point(r):
        p = model_params(cfg, r)
        dyn = ClosedDynamics(p)
        series = dyn.series("concurrence", dispersive_horizon(p))
        numeric = mes_lapse_numeric(series, cfg["lapse_tol"], ripple_period=dyn.ripple_period())
        an = mes_lapse_analytic(p)
        return [
            r,
            np.nan if numeric is None else numeric,
            np.nan if an.mes_lapse_P is None else an.mes_lapse_P,
            an.cos_theta,
            float(an.threshold_ok),
        ]

    lapse = np.array(_map(point, ratio_grid(cfg), threads))
    return [
        Dataset("dynamics", cols, rows),
        Dataset("lapse", ["r", "P_numeric", "P_analytic", "cos_theta", "threshold_ok"], lapse),
    ]


def _coherence_dynamics(cfg, threads):
    p = model_params(cfg)
    t = _time_grid(_auto_horizon(cfg, 2 * theta_period(p)), cfg["sample_count"])
    dyn = ClosedDynamics(p)
    return [Dataset("", ["t", "E", "C"], np.column_stack([t, dyn.concurrence(t), dyn.coherence(t)]))]


def _resonant_peak_sweep(cfg, threads):
    grid = ratio_grid(cfg)

    def point(r):
        e_p, t_p, c_p = entanglement_peak(model_params(cfg, r), horizon=_auto_horizon(cfg, 60.0))
        return [r, e_p, t_p, c_p]

    return [Dataset("", ["r", "E_p", "t_peak", "C_p"], np.array(_map(point, grid, threads)))]


def _sz_dynamics(cfg, threads):
    ratios = _ratios(cfg, (1.0, 0.5, 0.3))

    def columns_for(r):
        def block(t):
            dyn = ClosedDynamics(model_params(cfg, r))
            return np.column_stack([dyn.sz(t, 1), dyn.sz(t, 2)])

        return [f"sz1_r{_label(r)}", f"sz2_r{_label(r)}"], block

    _, cols, rows = _dynamics_table(cfg, ratios, 40.0, columns_for, threads)
    return [Dataset("", cols, rows)]


def _open_dynamics(cfg, threads, default_ratios):
    ratios = _ratios(cfg, default_ratios)
    t = _time_grid(_auto_horizon(cfg, 1000.0), cfg["sample_count"])

    def block(r):
        p = model_params(cfg, r)
        rhos = evolve_open(p, default_initial_state(p.n_max), t, rtol=cfg["rtol"], atol=cfg["atol"])
        return two_qubit_concurrence(rhos, p.n_max)

    cols = ["t"] + [f"E_r{_label(r)}" for r in ratios]
    return [Dataset("", cols, np.column_stack([t, *_map(block, ratios, threads)]))]


def _dissipative_dynamics(cfg, threads):
    return _open_dynamics(cfg, threads, (1.0, 0.4, 0.3))


def _driven_dynamics(cfg, threads):
    return _open_dynamics(cfg, threads, (1.0, 0.4, 0.3))


def _converged_cutoff(p):
    _, n = check_truncation_convergence(p)
    return n


def _steady_concurrence(p):
    return two_qubit_concurrence(steady_state(p), p.n_max)


def _steady_vs_ratio(cfg, threads):
    grid = ratio_grid(cfg)
    drives = _ratios({"ratios": cfg["drives"]}, (0.05, 0.06))
    n_max = max(_converged_cutoff(model_params(cfg, grid[-1], d=max(drives))), cfg["n_max"])
    cols = ["r"] + [f"E_ss_d{_label(d)}" for d in drives]
    points = [(r, d) for r in grid for d in drives]
    vals = _map(lambda rd: _steady_concurrence(model_params(cfg, rd[0], d=rd[1], n_max=n_max)), points, threads)
    rows = np.column_stack([grid, np.array(vals).reshape(len(grid), len(drives))])
    return [Dataset("", cols, rows, {"n_max_used": n_max})]


def _steady_vs_drive(cfg, threads):
    grid = drive_grid(cfg)
    n_max = max(_converged_cutoff(model_params(cfg, d=grid[-1])), cfg["n_max"])
    vals = _map(lambda d: _steady_concurrence(model_params(cfg, d=d, n_max=n_max)), grid, threads)
    return [Dataset("", ["d", "E_ss"], np.column_stack([grid, vals]), {"n_max_used": n_max})]


SCENARIOS = {
    s.name: s
    for s in [
        Scenario(
            "eigvec-coeff-sweep",
            "Eigen-energies and |coefficients| of the three single-excitation eigenvectors vs g2/g1",
            {},
            _eigvec_coeff_sweep,
            ("dispersive: r,e1,e2,e3,v{k}_{100,010,001} for k=1..3", "resonant (omega = eps1): same columns"),
        ),
        Scenario(
            "overlap-dynamics",
            "Populations of the evolving state on each eigenstate, dispersive and resonant",
            {},
            _overlap_dynamics,
            ("dispersive: t,overlap_E1,overlap_E2,overlap_E3", "resonant: same columns"),
        ),
        Scenario(
            "dispersive-dynamics",
            "Exact concurrence E(t) in the dispersive regime for several g2/g1",
            {},
            _dispersive_dynamics,
            ("t,E_r<ratio>...",),
        ),
        Scenario(
            "dispersive-peak-sweep",
            "Peak concurrence E_p and coherence C_p vs g2/g1, dispersive regime",
            {},
            _dispersive_peak_sweep,
            ("r,E_p,t_peak,C_p",),
        ),
        Scenario(
            "mes-lapse",
            "Dynamics with M-shaped MES pairs and the minimum MES time lapse P vs g2/g1",
            {"r_min": 0.4},
            _mes_lapse,
            ("dynamics: t,E_r<ratio>...", "lapse: r,P_numeric,P_analytic,cos_theta,threshold_ok"),
        ),
        Scenario(
            "coherence-dynamics",
            "Concurrence and off-diagonal coherence dynamics at g2/g1 = 0.9",
            {"g2_over_g1": 0.9},
            _coherence_dynamics,
            ("t,E,C",),
        ),
        Scenario(
            "resonant-peak-sweep",
            "Peak concurrence and coherence vs g2/g1 on resonance",
            dict(_RESONANT),
            _resonant_peak_sweep,
            ("r,E_p,t_peak,C_p",),
        ),
        Scenario(
            "sz-dynamics",
            "Qubit <S^z> dynamics on resonance for several g2/g1",
            dict(_RESONANT),
            _sz_dynamics,
            ("t,sz1_r<ratio>,sz2_r<ratio>...",),
        ),
        Scenario(
            "dissipative-dynamics",
            "Lindblad concurrence dynamics without drive",
            {**_OPEN, "d": 0.0, "Omega_drive": 0.0},
            _dissipative_dynamics,
            ("t,E_r<ratio>...",),
        ),
        Scenario(
            "driven-dynamics",
            "Lindblad concurrence dynamics with qubit 2 driven at d = 0.05",
            {**_OPEN, "d": 0.05, "Omega_drive": 10.0},
            _driven_dynamics,
            ("t,E_r<ratio>...",),
        ),
        Scenario(
            "steady-vs-ratio",
            "Steady-state concurrence vs g2/g1 for drive strengths 0.05 and 0.06",
            {**_OPEN, "Omega_drive": 10.0},
            _steady_vs_ratio,
            ("r,E_ss_d<drive>...",),
        ),
        Scenario(
            "steady-vs-drive",
            "Steady-state concurrence vs drive strength at g2/g1 = 1",
            {**_OPEN, "Omega_drive": 10.0, "g2_over_g1": 1.0},
            _steady_vs_drive,
            ("d,E_ss",),
        ),
    ]
}


def list_scenarios():
    """Sorted ``(name, description)`` pairs."""
    return [(name, SCENARIOS[name].description) for name in sorted(SCENARIOS)]


def get_scenario(name):
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}") from None


def _fmt(x):
    if np.isnan(x):
        return "nan"
    return "%.17g" % x


def _fmt_cfg(v):
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(scenario, cfg, applied, dataset):
    rows = dataset.check()
    lines = [f"# cavent_version={__version__}", f"# scenario={scenario.name}"]
    if dataset.suffix:
        lines.append(f"# dataset={dataset.suffix}")
    lines += [f"# override {a}" for a in applied]
    lines += [f"# {k}={_fmt_cfg(cfg[k])}" for k in CONFIG_KEYS if k != "out_dir"]
    lines += [f"# {k}={_fmt_cfg(v)}" for k, v in dataset.extra_header.items()]
    lines.append(",".join(dataset.columns))
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def _atomic_write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_scenario(name, overrides=(), config_file=None, out_dir=None, threads=1):
    """Run a registered scenario and write its CSV files.

    ``overrides`` are ``key=value`` strings applied after ``config_file``.
    Every dataset is computed before anything is written, so a failing run
    leaves no partial output. Returns the written paths.
    """
    scenario = get_scenario(name)
    file_overrides = read_config_file(config_file) if config_file else []
    cfg, applied = resolve_config(scenario.defaults, file_overrides, parse_overrides(overrides))
    if out_dir is not None:
        cfg["out_dir"] = str(out_dir)
    datasets = scenario.runner(cfg, threads)
    texts = []
    for ds in datasets:
        fname = f"{scenario.name}__{ds.suffix}.csv" if ds.suffix else f"{scenario.name}.csv"
        texts.append((Path(cfg["out_dir"]) / fname, format_csv(scenario, cfg, applied, ds)))
    for path, text in texts:
        _atomic_write(path, text)
    return [path for path, _ in texts]
