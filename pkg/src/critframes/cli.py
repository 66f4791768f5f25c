"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 internal failure, 3 when
``--check-bound`` is given and the census falls short of the lower bound.
"""
from __future__ import annotations

import argparse
import datetime
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .bounds import bounds_report
from .errors import DegenerateFrame, SpecError
from .frames import Frame
from .geometry import build_body, build_norm
from .grid import scan_2d
from .io import (
    bj_svg,
    census_csv,
    dumps,
    load_json_arg,
    matrix_to_json,
    parallelotope_svg,
)
from .parallelotope import outscribe
from .solver import (
    BJProblem,
    ParallelotopeProblem,
    SolverConfig,
    classify_critical,
    multistart_census,
    verify_lower_bound,
)

log = logging.getLogger("critframes")

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL, EXIT_BOUND = 0, 1, 2, 3

SPEC_HELP = """\
Body specs (--body):
  {"type":"ellipsoid","matrix":[[4,0],[0,1]]}
  {"type":"pball","p":4.0,"weights":[1.0,2.0]}
  {"type":"sum","parts":[<body>, ...]}
Norm specs (--norm):
  {"type":"pnorm","p":4.0}            (weights optional; then pass --n)
  {"type":"pnorm","p":4.0,"weights":[1.0,2.0]}
  {"type":"gauge","body":<body>}
Frames (--frame): JSON array of vectors, e.g. [[1,0],[0,1]]; rescaled to unit length.
Inline JSON or @path/to/file.json is accepted everywhere."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{SPEC_HELP}\n")
        raise SystemExit(EXIT_INVALID)


def _add_output(p, formats=("json",)):
    p.add_argument("--out", help="write the result to this file instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--no-meta", action="store_true",
                   help="omit timestamps and timings so output is byte-reproducible")


def _add_problem(p, which=None):
    if which is None:
        p.add_argument("--problem", choices=("parallelotope", "bj"), required=True)
    if which in (None, "parallelotope"):
        p.add_argument("--body", help="convex body spec (JSON or @file)")
    if which in (None, "bj"):
        p.add_argument("--norm", help="norm spec (JSON or @file)")
        p.add_argument("--n", type=int, help="dimension for weight-free p-norms")


def _add_solver(p):
    p.add_argument("--starts", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10, help="residual tolerance")
    p.add_argument("--merge-tol", type=float, default=1e-6, help="orbit merge distance")
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the multistart")


def build_parser():
    parser = _Parser(prog="critframes", description=__doc__.splitlines()[0],
                     epilog=SPEC_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="evaluate the topological lower bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--primes", default="2,3,5")
    _add_output(p, ("json", "text"))

    for name, which in (("outscribe-census", "parallelotope"), ("bj-census", "bj")):
        p = sub.add_parser(name, help=f"multistart census of critical {which} frames")
        _add_problem(p, which)
        _add_solver(p)
        p.add_argument("--check-bound", action="store_true",
                       help="exit 3 when fewer than n(n-1)/2+1 orbits are found")
        _add_output(p, ("json", "csv"))

    p = sub.add_parser("verify", help="residual and objective of a given frame")
    _add_problem(p)
    p.add_argument("--frame", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_output(p)

    p = sub.add_parser("oracle-scan", help="brute-force grid scan of a planar problem")
    _add_problem(p)
    p.add_argument("--resolution", type=int, default=600)
    _add_output(p)

    p = sub.add_parser("plot", help="SVG of a planar body/norm with critical configurations")
    _add_problem(p)
    p.add_argument("--frame", help="draw this frame instead of running a census")
    _add_solver(p)
    p.add_argument("--out", help="SVG output path (default stdout)")
    return parser


# ---------------------------------------------------------------------------


def _problem(args):
    kind = getattr(args, "problem", None)
    if kind is None:
        kind = "parallelotope" if args.command == "outscribe-census" else "bj"
    if kind == "parallelotope":
        if not args.body:
            raise SpecError("--body is required for the parallelotope problem")
        return ParallelotopeProblem(build_body(load_json_arg(args.body)))
    if not args.norm:
        raise SpecError("--norm is required for the bj problem")
    n = args.n
    if n is None and getattr(args, "frame", None):
        frame = load_json_arg(args.frame)
        n = len(frame) if isinstance(frame, list) else None
    return BJProblem(build_norm(load_json_arg(args.norm)), n=n)


def _frame_arg(problem, text):
    raw = load_json_arg(text)
    try:
        V = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise SpecError("frame must be a JSON array of numeric vectors") from None
    if V.shape != (problem.n, problem.n):
        raise SpecError(f"frame must have shape ({problem.n}, {problem.n}), got {V.shape}")
    try:
        return Frame.from_vectors(V, problem.frame_norm)
    except DegenerateFrame as exc:
        raise SpecError(f"frame is not a basis: {exc}") from None


def _config(args):
    return SolverConfig(starts=args.starts, master_seed=args.seed, tol_residual=args.tol,
                        tol_merge=args.merge_tol, max_iters=args.max_iters)


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish(args, doc, started):
    if not args.no_meta:
        doc["meta"] = {
            "tool": "critframes",
            "version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "elapsed_s": round(time.perf_counter() - started, 6),
        }
    return dumps(doc)


def cmd_bounds(args, started):
    try:
        primes = [int(p) for p in args.primes.split(",") if p.strip()] if args.primes else []
    except ValueError:
        raise SpecError(f"--primes must be a comma-separated list of integers, got {args.primes!r}") from None
    report = bounds_report(args.n, args.k, args.d, primes)
    if args.format == "text":
        rows = [("n", report.n), ("k", report.k), ("d", report.d),
                ("genus", report.genus), ("cat_quotient", report.cat_quotient),
                ("config_cat_lower", report.config_cat_lower)]
        rows += [(f"digit_sum_bound[p={p}]", v) for p, v in report.digit_sum_bounds.items()]
        rows += [("best_bound", report.best_bound),
                 ("critical_count_lower", report.critical_count_lower)]
        width = max(len(k) for k, _ in rows)
        _emit(args, "".join(f"{k:<{width}}  {'-' if v is None else v}\n" for k, v in rows))
        return EXIT_OK
    doc = {"command": "bounds", **report.to_dict()}
    _emit(args, _finish(args, doc, started))
    return EXIT_OK


def cmd_census(args, started):
    problem = _problem(args)
    config = _config(args)
    census = multistart_census(problem, config, jobs=args.jobs)
    check = verify_lower_bound(census, problem.n)
    if args.format == "csv":
        _emit(args, census_csv(census.orbits))
    else:
        doc = {"command": args.command, "problem": problem.to_dict(), **census.to_dict(),
               "bound_check": check.to_dict()}
        _emit(args, _finish(args, doc, started))
    if args.check_bound and not check.satisfied:
        log.warning("found %d orbits, bound requires %d", check.found, check.required)
        return EXIT_BOUND
    return EXIT_OK


def cmd_verify(args, started):
    problem = _problem(args)
    frame = _frame_arg(problem, args.frame)
    R = problem.residual_matrix(frame)
    res = problem.residual_max(frame)
    doc = {
        "command": "verify",
        "problem": problem.to_dict(),
        "frame": frame.to_list(),
        "residual_matrix": matrix_to_json(R),
        "residual_max": res,
        "objective": problem.objective(frame),
        "critical": res <= args.tol,
        "tol": args.tol,
    }
    if res <= args.tol:
        index, nullity = classify_critical(problem, frame, SolverConfig(tol_residual=args.tol))
        doc["morse_index"], doc["hessian_nullity"] = index, nullity
    if problem.kind == "parallelotope":
        doc["parallelotope"] = outscribe(problem.body, frame).to_dict()
    _emit(args, _finish(args, doc, started))
    return EXIT_OK


def cmd_oracle_scan(args, started):
    problem = _problem(args)
    zeros = scan_2d(problem, args.resolution)
    doc = {"command": "oracle-scan", "problem": problem.to_dict(),
           "resolution": args.resolution, "zeros": [z.to_dict() for z in zeros]}
    _emit(args, _finish(args, doc, started))
    return EXIT_OK


def cmd_plot(args, started):
    problem = _problem(args)
    if problem.n != 2:
        raise SpecError("plot supports n = 2 only")
    if args.frame:
        frames = [_frame_arg(problem, args.frame)]
    else:
        frames = [o.canonical_frame for o in multistart_census(problem, _config(args), args.jobs)]
    if problem.kind == "parallelotope":
        svg = parallelotope_svg(problem.body, [outscribe(problem.body, f) for f in frames])
    else:
        svg = bj_svg(problem.norm.unit_ball(problem.n), frames)
    _emit(args, svg)
    return EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "outscribe-census": cmd_census,
    "bj-census": cmd_census,
    "verify": cmd_verify,
    "oracle-scan": cmd_oracle_scan,
    "plot": cmd_plot,
}


def _setup_logging():
    level = os.environ.get("CRITFRAMES_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def dispatch(argv=None):
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    started = time.perf_counter()
    try:
        return COMMANDS[args.command](args, started)
    except SpecError as exc:
        sys.stderr.write(f"critframes: invalid input: {exc}\n")
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - last-resort reporting for the CLI
        log.debug("internal failure", exc_info=True)
        sys.stderr.write(f"critframes: internal failure: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
