"""Command-line interface.

Subcommands::

    hybridchsh evaluate <config>             correlators and S as configured
    hybridchsh optimize <config>             maximize S over free parameters
    hybridchsh threshold <config> --param P  bisect the S = 2 crossing of P
    hybridchsh fig2 [<config>]               S* curves over a transmission grid
    hybridchsh locality                      separation and fiber-loss budget
    hybridchsh stability                     interferometric phase budget

``<config>`` is a TOML file path or the name of a bundled config. Every
subcommand accepts ``--out`` (output directory) and ``--seed``.

Exit codes: 0 success, 1 usage or config parse error, 2 domain error,
3 optimizer non-convergence.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import app
from .chsh import DEFAULT_STARTS
from .errors import ConfigError, ConvergenceError, DomainError

DEFAULT_WAVELENGTH = 800e-9
DEFAULT_DELTA_L = 1.27e-8

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_NO_CONVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; we reserve 2 for
    domain errors, so usage problems are rethrown as config errors."""

    def error(self, message):
        raise ConfigError(message)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", type=Path, default=Path("."),
                     help="output directory (default: current directory)")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for the quasi-random optimizer starts")


def _add_starts(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--starts", type=int, default=DEFAULT_STARTS,
                     help=f"number of optimizer starts (default {DEFAULT_STARTS})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridchsh",
                     description="CHSH tests on atom-photon superposition "
                                 "states: evaluate, optimize, and sweep.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_eval = subs.add_parser("evaluate", help="evaluate a pinned scenario")
    p_eval.add_argument("config", help="TOML path or bundled config name")
    _add_common(p_eval)

    p_opt = subs.add_parser("optimize", help="maximize S over free parameters")
    p_opt.add_argument("config", help="TOML path or bundled config name")
    _add_common(p_opt)
    _add_starts(p_opt)

    p_thr = subs.add_parser("threshold", help="bisect the S = 2 crossing")
    p_thr.add_argument("config", help="TOML path or bundled config name")
    p_thr.add_argument("--param", required=True, choices=("eta_t", "eta_d"),
                       help="imperfection parameter to sweep")
    p_thr.add_argument("--lo", type=float, default=0.0, help="sweep lower edge")
    p_thr.add_argument("--hi", type=float, default=1.0, help="sweep upper edge")
    p_thr.add_argument("--tol", type=float, default=0.005,
                       help="absolute tolerance on the returned crossing")
    _add_common(p_thr)
    _add_starts(p_thr)

    p_fig = subs.add_parser("fig2", help="optimized S over a transmission grid")
    p_fig.add_argument("config", nargs="?", default=None,
                       help="sweep TOML (default: bundled fig2)")
    _add_common(p_fig)
    _add_starts(p_fig)

    p_loc = subs.add_parser("locality", help="separation and fiber-loss budget")
    p_loc.add_argument("--distance", type=float, default=300.0,
                       help="link distance in meters (default 300)")
    p_loc.add_argument("--attenuation", type=float,
                       default=app.DEFAULT_ATTENUATION_DB_PER_KM,
                       help="fiber attenuation in dB/km (default 2)")
    p_loc.add_argument("--detection-time", type=float,
                       default=app.DEFAULT_DETECTION_TIME,
                       help="measurement duration in seconds (default 1e-6)")
    p_loc.add_argument("--signal-speed", type=float,
                       default=app.VACUUM_SIGNAL_SPEED,
                       help="bounding signal speed in m/s (default 3e8)")
    p_loc.add_argument("--fiber-speed", type=float,
                       default=app.FIBER_SIGNAL_SPEED,
                       help="fiber group velocity in m/s (default 2e8)")
    _add_common(p_loc)

    p_sta = subs.add_parser("stability", help="interferometric phase budget")
    p_sta.add_argument("--k-norm", type=float, default=None,
                       help="wavevector magnitude in 1/m (overrides --wavelength)")
    p_sta.add_argument("--wavelength", type=float, default=DEFAULT_WAVELENGTH,
                       help="wavelength in meters (default 800e-9)")
    p_sta.add_argument("--delta-l", type=float, default=DEFAULT_DELTA_L,
                       help="path-length excursion in meters (default 1.27e-8)")
    p_sta.add_argument("--threshold", type=float,
                       default=app.DEFAULT_STABILITY_THRESHOLD,
                       help="maximum acceptable phase in rad (default 0.1)")
    _add_common(p_sta)

    return parser


def _dispatch(args: argparse.Namespace) -> app.RunOutput:
    if args.command == "evaluate":
        return app.run_evaluate(args.config, args.out)
    if args.command == "optimize":
        return app.run_optimize(args.config, args.out, seed=args.seed,
                                n_starts=args.starts)
    if args.command == "threshold":
        return app.run_threshold(args.config, args.out, param=args.param,
                                 lo=args.lo, hi=args.hi, tol=args.tol,
                                 seed=args.seed, n_starts=args.starts)
    if args.command == "fig2":
        return app.run_fig2(args.config, args.out, seed=args.seed,
                            n_starts=args.starts)
    if args.command == "locality":
        return app.run_locality(args.out, distance=args.distance,
                                attenuation=args.attenuation,
                                detection_time=args.detection_time,
                                signal_speed=args.signal_speed,
                                fiber_speed=args.fiber_speed)
    if args.command == "stability":
        k_norm = args.k_norm
        if k_norm is None:
            if args.wavelength <= 0:
                raise DomainError("wavelength must be positive")
            k_norm = 2.0 * math.pi / args.wavelength
        return app.run_stability(args.out, k_norm=k_norm, delta_l=args.delta_l,
                                 threshold=args.threshold)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        output = _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(output.summary, end="")
    for path in output.files:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
