"""Command-line surface: batch analysis of model files with CSV/PNG outputs.

Exit codes: 0 success, 1 usage error, 2 model/validation failure.  The
environment variable LATREL_TOL overrides the default quadrature tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis
from .dsl import ParseError, parse_model
from .engine import OracleError
from .dependence import FactorModelError, QuadratureError
from .lattice import (
    STRUCTURE_FORMS,
    StructureError,
    check_semicoherent,
    format_subset,
    minimal_paths_cuts,
    mobius,
    dual,
    semicoherence_violation,
    setfunction_to_expr,
    structure_eval,
)
from .mc import SimulationConfig, simulate
from .quadrature import DEFAULT_TOL

USAGE_ERROR = 1
VALIDATION_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _fmt(x):
    return format(float(x), ".12g")


def _default_tol():
    raw = os.environ.get("LATREL_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        print(f"error: LATREL_TOL={raw!r} is not a number", file=sys.stderr)
        raise SystemExit(USAGE_ERROR) from None


def _load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_model(fh.read())
    except OSError as exc:
        print(f"error: {path}: {exc.strerror or exc}", file=sys.stderr)
        raise SystemExit(VALIDATION_ERROR) from None
    except ParseError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(VALIDATION_ERROR) from None


def _parse_grid(spec, log):
    try:
        start_s, stop_s, count_s = spec.split(":")
        start, stop, count = float(start_s), float(stop_s), int(count_s)
    except ValueError:
        print(f"error: bad grid spec {spec!r}, expected start:stop:count", file=sys.stderr)
        raise SystemExit(USAGE_ERROR) from None
    if count < 1 or stop <= start or start < 0 or (log and start <= 0):
        print(f"error: bad grid spec {spec!r}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)
    if log:
        return tuple(np.geomspace(start, stop, count))
    return tuple(np.linspace(start, stop, count))


def _add_model_arg(sub):
    sub.add_argument("model", help="model file (see README for the schema)")


def build_parser():
    parser = _Parser(prog="latrel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    for verb, text in (
        ("validate", "check the model and its semicoherence"),
        ("paths", "print minimal path sets, one per line"),
        ("cuts", "print minimal cut sets, one per line"),
        ("mobius", "print nonzero transform coefficients as 'subset,coefficient'"),
        ("dual", "print the dual structure as an expression"),
    ):
        s = sub.add_parser(verb, help=text)
        _add_model_arg(s)

    s = sub.add_parser("forms", help="evaluate all six structure-function forms at a state")
    _add_model_arg(s)
    s.add_argument("--state", required=True, help="comma-separated binary state, e.g. 1,0,1")

    s = sub.add_parser("reliability", help="write the reliability curve as CSV")
    _add_model_arg(s)
    s.add_argument("--grid", required=True, help="t-grid as start:stop:count")
    s.add_argument("--log", action="store_true", help="geometric instead of linear grid")
    s.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
    s.add_argument("-o", "--output", default="-", help="CSV path (default stdout)")
    s.add_argument("--plot", default=None, help="also render the curve to this image file")

    s = sub.add_parser("mttf", help="print mean time-to-failure as value,abs_error,diverged")
    _add_model_arg(s)
    s.add_argument("--tol", type=float, default=None)

    s = sub.add_parser("simulate", help="Monte Carlo estimates with standard errors")
    _add_model_arg(s)
    s.add_argument("--grid", required=True, help="t-grid as start:stop:count")
    s.add_argument("--log", action="store_true")
    s.add_argument("-N", "--samples", type=int, default=100000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--partitions", type=int, default=1)
    s.add_argument("-o", "--output", default="-", help="CSV path (default stdout)")
    s.add_argument("--plot", default=None, help="also render the estimates to this image file")
    return parser


def _open_out(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    tol = getattr(args, "tol", None) or _default_tol()

    model = _load_model(args.model)
    v = model.set_function()

    try:
        if args.verb == "validate":
            err = semicoherence_violation(v)
            if err is not None:
                detail = str(err)
                if err.subset_a is not None:
                    detail += (
                        f"; violating pair {format_subset(err.subset_a)}"
                        f" < {format_subset(err.subset_b)}"
                    )
                print(f"invalid: {detail}", file=sys.stderr)
                return VALIDATION_ERROR
            print(f"ok: {model.name}: semicoherent structure on {model.n} components")
            return 0

        check_semicoherent(v)

        if args.verb in ("paths", "cuts"):
            pc = minimal_paths_cuts(v)
            for subset in pc.paths if args.verb == "paths" else pc.cuts:
                print(" ".join(str(i) for i in subset))
            return 0

        if args.verb == "mobius":
            m = mobius(v)
            for mask in np.nonzero(m.coeffs)[0]:
                members = " ".join(
                    str(i + 1) for i in range(model.n) if int(mask) >> i & 1
                )
                print(f"{members},{int(m.coeffs[mask])}")
            return 0

        if args.verb == "dual":
            print(_format_dual(v))
            return 0

        if args.verb == "forms":
            try:
                state = [int(b) for b in args.state.split(",")]
            except ValueError:
                print(f"error: bad state {args.state!r}", file=sys.stderr)
                return USAGE_ERROR
            for form in STRUCTURE_FORMS:
                print(f"{form} = {structure_eval(v, state, form)}")
            return 0

        if args.verb == "reliability":
            grid = _parse_grid(args.grid, args.log)
            curve = analysis.reliability_curve(model, grid, tol)
            fh, close = _open_out(args.output)
            try:
                curve.write_csv(fh)
            finally:
                if close:
                    fh.close()
            if args.plot:
                from .report import save_curve_plot

                save_curve_plot(curve.grid, curve.values, args.plot, title=model.name)
            return 0

        if args.verb == "mttf":
            result = analysis.system_mttf(model, tol)
            print(f"{_fmt(result.value)},{_fmt(result.abs_error)},{str(result.diverged).lower()}")
            return 0

        if args.verb == "simulate":
            grid = _parse_grid(args.grid, args.log)
            cfg = SimulationConfig(
                n_samples=args.samples, seed=args.seed, grid=grid, partitions=args.partitions
            )
            result = simulate(model, cfg)
            fh, close = _open_out(args.output)
            try:
                result.write_csv(fh)
            finally:
                if close:
                    fh.close()
            print(
                f"# seed={result.seed} N={result.n_samples}"
                f" mttf={_fmt(result.mttf.estimate)} stderr={_fmt(result.mttf.stderr)}"
                f" clipped={result.clipped}",
                file=sys.stderr,
            )
            if args.plot:
                from .report import save_curve_plot

                save_curve_plot(
                    grid,
                    [e.estimate for e in result.curve],
                    args.plot,
                    title=f"{model.name} (N={result.n_samples})",
                    stderr=[e.stderr for e in result.curve],
                    label="estimate",
                )
            return 0
    except (StructureError, ParseError, FactorModelError, QuadratureError, OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_ERROR

    raise AssertionError(f"unhandled verb {args.verb}")


def _format_dual(v):
    from .dsl import format_expr

    return format_expr(setfunction_to_expr(dual(v)))


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
