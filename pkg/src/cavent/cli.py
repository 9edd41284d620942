"""Command-line entry point.

Exit codes: 0 on success, 2 for usage errors (bad arguments, unknown
scenario or config key), 3 when a computation fails numerically.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .errors import CaventError, NumericalError
from .experiments import (
    list_scenarios,
    model_params,
    parse_overrides,
    read_config_file,
    resolve_config,
    run_scenario,
)

_OPEN_DEFAULTS = {"omega": 10.0, "eps1": 10.0, "eps2": 10.0, "Omega_drive": 10.0, "n_max": 4, "d": 0.05}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _add_config_args(p):
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key (repeatable)")
    p.add_argument("--config", metavar="PATH", help="plain key=value config file; --set wins over it")


def build_parser():
    parser = _Parser(prog="cavent", description="Two-qubit cavity entanglement dynamics.")
    parser.add_argument("--version", action="version", version=f"cavent {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run a named scenario and write CSV output")
    run.add_argument("scenario")
    _add_config_args(run)
    run.add_argument("--threads", type=int, default=1, metavar="N", help="cap on concurrent sweep workers")

    sub.add_parser("list", help="list registered scenarios")

    eigen = sub.add_parser("eigen", help="print the single-excitation eigensystem")
    _add_config_args(eigen)

    steady = sub.add_parser("steady", help="print the steady-state concurrence")
    _add_config_args(steady)
    steady.add_argument("--check-convergence", action="store_true", help="also verify the Fock cutoff")

    validate = sub.add_parser("validate", help="run a quick invariant suite")
    validate.add_argument("--seed", type=int, default=0)
    return parser


def _config(args, defaults=None):
    file_overrides = read_config_file(args.config) if args.config else []
    cfg, _ = resolve_config(defaults, file_overrides, parse_overrides(args.set))
    return cfg


def _cmd_run(args, out):
    if args.threads < 1:
        raise _UsageError("--threads must be at least 1")
    for path in run_scenario(args.scenario, args.set, config_file=args.config, threads=args.threads):
        print(path, file=out)


def _cmd_list(args, out):
    for name, desc in list_scenarios():
        print(f"{name}\t{desc}", file=out)


def _cmd_eigen(args, out):
    from .model import analytic_eigensystem, hamiltonian_full, single_excitation_block
    from .numerics import hermitian_eig

    p = model_params(_config(args))
    es = analytic_eigensystem(p)
    w, _ = hermitian_eig(single_excitation_block(p, hamiltonian_full(p)))
    for k, (e, v) in enumerate(zip(es.energies, es.vectors.T), start=1):
        coeffs = " ".join(f"{x.real:+.12g}" for x in v)
        print(f"e{k} = {e:.12g}    v{k} (|100>,|010>,|001>) = {coeffs}", file=out)
    print("numeric eigenvalues: " + " ".join(f"{x:.12g}" for x in w), file=out)


def _cmd_steady(args, out):
    from .lindblad import check_truncation_convergence, steady_state, two_qubit_concurrence

    p = model_params(_config(args, _OPEN_DEFAULTS))
    if args.check_convergence:
        _, n = check_truncation_convergence(p)
        p = p.replace(n_max=n)
    c = two_qubit_concurrence(steady_state(p), p.n_max)
    print(f"E_ss = {c:.12g}  (g2/g1={p.g2:g}, d={p.d:g}, n_max={p.n_max})", file=out)


def _cmd_validate(args, out):
    from .validation import run_checks

    failures = 0
    for name, ok, detail in run_checks(np.random.default_rng(args.seed)):
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=out)
    return 0 if failures == 0 else 3


_COMMANDS = {
    "run": _cmd_run,
    "list": _cmd_list,
    "eigen": _cmd_eigen,
    "steady": _cmd_steady,
    "validate": _cmd_validate,
}


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        if not argv:
            raise _UsageError(parser.format_usage().strip())
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError(parser.format_usage().strip())
        code = _COMMANDS[args.command](args, out)
        return 0 if code is None else code
    except _UsageError as exc:
        print(exc, file=err)
        return 2
    except NumericalError as exc:
        print(f"cavent: numerical failure: {type(exc).__name__}: {exc}", file=err)
        return 3
    except (CaventError, OSError) as exc:
        print(f"cavent: error: {type(exc).__name__}: {exc}", file=err)
        return 2
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else 0


def parse_and_dispatch(argv):
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
