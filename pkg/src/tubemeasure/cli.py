"""Command-line front end.

Exit codes: 0 success, 2 unreadable input, 3 invalid arguments, 4 numerical
failure, 5 a bound check failed.
"""

import argparse
from datetime import datetime, timezone
import json
import os
import sys

from . import __version__
from .curvature import DegenerateSchedule, RadiiSchedule, curvature_from_cloud
from .estimator import estimate_boundary_measure, required_sample_count
from .experiments import (
    OutOfWindow,
    boundary_area_check,
    convexity_and_gradient_check,
    convexity_suite,
    holder_knife_experiment,
    area_suite,
    stability_experiment,
    symdiff_bound_check,
    symdiff_suite,
)
from .geom import PointFileError, covering_number, read_points
from .rng import substream_seed
from .sampler import SamplerStalled

EXIT_OK, EXIT_INPUT, EXIT_ARGS, EXIT_NUMERIC, EXIT_BOUND = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def build_parser():
    parser = _Parser(prog="tubemeasure", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, threads=True):
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: $TUBEMEASURE_SEED, else 0)")
        p.add_argument("--output", default="-", help="output file ('-' for stdout)")
        p.add_argument("--no-meta", action="store_true", help="omit the timestamped run block")
        if threads:
            p.add_argument("--threads", type=int, default=1, help="worker count (default 1)")

    p = sub.add_parser("boundary", help="estimate the boundary measure of a point file")
    p.add_argument("--input", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--confidence", type=float)
    common(p)

    p = sub.add_parser("curvature", help="curvature profiles from boundary measures at n+1 radii")
    p.add_argument("--input", required=True)
    p.add_argument("--radii", type=_floats, required=True)
    p.add_argument("--n-per-radius", type=int, required=True)
    common(p)

    p = sub.add_parser("stability", help="bounded-Lipschitz distance under jitter, per eps")
    p.add_argument("--input", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--eps", type=_floats, required=True)
    p.add_argument("--n", type=int, default=10 ** 5)
    p.add_argument("--json", help="also write the report as JSON")
    common(p)

    p = sub.add_parser("knife", help="projection distance to knife blades converging to a segment")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--nseg", type=_ints, default=[4, 8, 16, 32])
    p.add_argument("--n", type=int, default=10 ** 5)
    p.add_argument("--samples-per-arc", type=int, default=64)
    p.add_argument("--json", help="also write the report as JSON")
    common(p, threads=False)

    p = sub.add_parser("check", help="randomised bound checks")
    p.add_argument("--suite", choices=("symdiff", "convexity", "area"), required=True)
    p.add_argument("--input", help="run on this cloud instead of random ones")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--r", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--h", type=float)
    common(p, threads=False)
    return parser


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TUBEMEASURE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"TUBEMEASURE_SEED is not an integer: {env!r}") from None


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dump(payload, args):
    if not args.no_meta:
        payload["run"] = {"generated_at": datetime.now(timezone.utc).isoformat(), "version": __version__}
    return json.dumps(payload, indent=1) + "\n"


def _positive(name, value):
    if value is None or not value > 0:
        raise UsageError(f"--{name} must be positive")


def cmd_boundary(args):
    cloud = read_points(args.input)
    _positive("r", args.r)
    by_n = args.n is not None
    by_eps = args.eps is not None or args.confidence is not None
    if by_n == by_eps:
        raise UsageError("give exactly one of --n or (--eps and --confidence)")
    extra = {}
    if by_n:
        _positive("n", args.n)
        N = args.n
    else:
        if args.eps is None or args.confidence is None:
            raise UsageError("--eps and --confidence go together")
        if not 0 < args.eps < 2 or not 0 < args.confidence < 1:
            raise UsageError("need 0 < --eps < 2 and 0 < --confidence < 1")
        cov = covering_number(cloud, args.eps / 16)
        N = required_sample_count(cov, args.eps, 1 - args.confidence)
        extra = {"eps": args.eps, "confidence": args.confidence, "covering_number": cov}
    _positive("threads", args.threads)
    est = estimate_boundary_measure(cloud, args.r, N, _seed(args), workers=args.threads)
    payload = est.to_dict()
    payload["metadata"].update(extra)
    _emit(_dump(payload, args), args.output)
    return EXIT_OK


def cmd_curvature(args):
    cloud = read_points(args.input)
    _positive("n-per-radius", args.n_per_radius)
    _positive("threads", args.threads)
    try:
        schedule = RadiiSchedule(tuple(args.radii), cloud.dim)
    except ValueError as exc:
        raise UsageError(f"--radii: {exc}") from None
    profile = curvature_from_cloud(cloud, schedule, args.n_per_radius, _seed(args), workers=args.threads)
    payload = profile.to_dict()
    payload["metadata"] = {"n_per_radius": args.n_per_radius, "seed": _seed(args), "threads": args.threads}
    _emit(_dump(payload, args), args.output)
    return EXIT_OK


def cmd_stability(args):
    cloud = read_points(args.input)
    _positive("r", args.r)
    _positive("n", args.n)
    _positive("threads", args.threads)
    try:
        report = stability_experiment(cloud, args.r, args.eps, args.n, _seed(args), workers=args.threads)
    except OutOfWindow as exc:
        raise UsageError(str(exc)) from None
    _emit(report.to_csv(), args.output)
    if args.json:
        _emit(_dump(report.to_dict(), args), args.json)
    return EXIT_OK


def cmd_knife(args):
    _positive("L", args.L)
    _positive("R", args.R)
    _positive("n", args.n)
    if not args.nseg or min(args.nseg) < 1:
        raise UsageError("--nseg needs positive integers")
    report = holder_knife_experiment(args.L, args.R, args.nseg, N=args.n, seed=_seed(args),
                                     samples_per_arc=args.samples_per_arc)
    _emit(report.to_csv(), args.output)
    if args.json:
        _emit(_dump(report.to_dict(), args), args.json)
    else:
        sys.stderr.write(f"fitted log-log slope: {report.fitted_slope:.4f}\n")
    return EXIT_OK


def cmd_check(args):
    seed = _seed(args)
    _positive("trials", args.trials)
    _positive("samples", args.samples)
    cloud = read_points(args.input) if args.input else None
    if args.suite == "convexity":
        report = (convexity_and_gradient_check(cloud, args.trials, seed) if cloud is not None
                  else convexity_suite(args.trials, seed))
        payload = {"suite": "convexity", "seed": seed, **report.to_dict()}
        ok = report.passed
    else:
        if cloud is None:
            suite = symdiff_suite if args.suite == "symdiff" else area_suite
            checks = suite(args.trials, seed, args.samples)
        elif args.suite == "symdiff":
            _positive("r", args.r)
            if args.eps is None or not 0 < args.eps < args.r:
                raise UsageError("symdiff on a cloud needs 0 < --eps < --r")
            checks = [symdiff_bound_check(cloud, args.r, args.eps, args.samples, substream_seed(seed, t))
                      for t in range(args.trials)]
        else:
            _positive("r", args.r)
            h = args.h if args.h is not None else args.r / 50
            if not 0 < h < args.r / 10:
                raise UsageError("need 0 < --h < r/10")
            checks = [boundary_area_check(cloud, args.r, h, args.samples, substream_seed(seed, t))
                      for t in range(args.trials)]
        ok = all(c.passed for c in checks)
        payload = {"suite": args.suite, "seed": seed, "passed": ok,
                   "failures": sum(not c.passed for c in checks),
                   "checks": [c.to_dict() for c in checks]}
    _emit(_dump(payload, args), args.output)
    return EXIT_OK if ok else EXIT_BOUND


COMMANDS = {
    "boundary": cmd_boundary,
    "curvature": cmd_curvature,
    "stability": cmd_stability,
    "knife": cmd_knife,
    "check": cmd_check,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"tubemeasure: error: {exc}\n")
        return EXIT_ARGS
    except (PointFileError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"tubemeasure: input error: {exc}\n")
        return EXIT_INPUT
    except (DegenerateSchedule, SamplerStalled, RuntimeError) as exc:
        sys.stderr.write(f"tubemeasure: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
