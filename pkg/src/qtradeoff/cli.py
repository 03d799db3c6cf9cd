"""Command-line front end.

Every subcommand writes one dataset (CSV or JSON) to stdout or ``--out``;
diagnostics go to stderr. Exit codes: 0 success, 2 invalid input,
3 sampling budget exhausted, 64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

import numpy as np

from . import correlation, improver, oracle
from .geometry import angle_set, direction_set
from .measurement import (
    InvalidMeasurementError,
    Measurement,
    degeneracy_profile,
    metrics,
    outcome_probability,
    parse_measurement,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_UNKNOWN_COMMAND = 64

COMMANDS = ("eval", "scatter", "region", "range", "improve", "oracle")
CHECKS = ("formulas", "gradients", "directions", "region")


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def _common(p: argparse.ArgumentParser, pair=True, measurement=True):
    if measurement:
        p.add_argument("--lambda", dest="lam", metavar="L1,L2,...",
                       help="singular values, comma separated")
        p.add_argument("--preset", choices=sorted(correlation.PRESETS),
                       help="named measurement (sets --pair unless given)")
        p.add_argument("--rescale", action="store_true",
                       help="divide by the largest value when it exceeds 1")
        p.add_argument("--d", type=int, help="expected dimension (checked)")
    if pair:
        p.add_argument("--pair", choices=correlation.PAIRS, type=str.lower)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), dest="out_format")
    p.add_argument("--out", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtradeoff",
        description="Information-disturbance geometry of a single measurement outcome.")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")

    p = sub.add_parser("eval", help="metrics, degeneracies, angles and improvabilities")
    _common(p, pair=False)

    p = sub.add_parser("scatter", help="normalized changes of random admissible modifications")
    _common(p)
    p.add_argument("--eps", type=float, default=0.01, help="modification norm")
    p.add_argument("--count", type=int, default=250)
    p.add_argument("--max-attempts", type=int, default=correlation.MAX_ATTEMPTS_PER_SAMPLE,
                   help=argparse.SUPPRESS)

    p = sub.add_parser("region", help="boundary arcs of the change region and its ellipse")
    _common(p)
    p.add_argument("--count", type=int, default=correlation.ARC_POINTS,
                   help="points per arc")

    p = sub.add_parser("range", help="C++ against G along the fundamental families")
    _common(p, measurement=False)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--count", "--grid", dest="count", type=int, default=101,
                   help="interior grid points per family")

    p = sub.add_parser("improve", help="iterated improvement trajectory")
    _common(p)
    p.add_argument("--eps", type=float, required=True, help="step size")
    p.add_argument("--max-iter", type=int, default=improver.DEFAULT_MAX_ITER)
    p.add_argument("--conv-tol", type=float, default=improver.DEFAULT_CONV_TOL)

    p = sub.add_parser("oracle", help="independent numerical audits")
    _common(p)
    p.add_argument("--check", choices=CHECKS, required=True)
    p.add_argument("--samples", type=int, default=10 ** 5)
    p.add_argument("--count", type=int, default=10 ** 4, help="points for the region audit")
    p.add_argument("--eps", type=float, default=0.01, help="modification norm (region)")
    return parser


# --- helpers ----------------------------------------------------------------

def _measurement(args) -> tuple[Measurement, str | None]:
    preset_pair = None
    if args.lam and args.preset:
        raise UsageError("give either --lambda or --preset, not both")
    if args.preset:
        preset_pair, m = correlation.preset(args.preset)
    elif args.lam:
        m = parse_measurement(args.lam, allow_rescale=args.rescale)
    else:
        raise UsageError("--lambda or --preset is required")
    if args.d is not None and args.d != m.d:
        raise UsageError(f"--d {args.d} does not match {m.d} singular values")
    return m, preset_pair


def _pair(args, preset_pair) -> str:
    pair = args.pair or preset_pair
    if pair is None:
        raise UsageError("--pair is required")
    return pair


def _positive(value, name):
    if not value > 0:
        raise UsageError(f"{name} must be positive")


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer))
                    and not isinstance(v, bool) else v for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _table(header, rows, out_format):
    if out_format == "json":
        return _json([dict(zip(header, _plain(r))) for r in rows])
    return _csv(header, rows)


def _plain(row):
    out = []
    for v in row:
        if isinstance(v, (np.integer,)):
            out.append(int(v))
        elif isinstance(v, (np.floating,)):
            out.append(float(v))
        else:
            out.append(v)
    return out


# --- subcommands ------------------------------------------------------------

def evaluate(m: Measurement) -> dict:
    """The ``eval`` record: every scalar the library defines for ``m``."""
    met = metrics(m)
    prof = degeneracy_profile(m)
    a = angle_set(m)
    return {
        "d": m.d,
        "lambdas": [float(x) for x in m.lambdas],
        "G": met.g, "F": met.f, "R": met.r,
        "p": outcome_probability(m),
        "n1": prof.n1, "nd": prof.nd, "n0": prof.n0,
        "cos_theta_g": a.cos_theta_g, "cos_theta_f": a.cos_theta_f,
        "cos_theta_r": a.cos_theta_r,
        "C_GF": a.c_gf, "C_GR": a.c_gr,
        "C_GF_pp": a.c_gf_pp, "C_GF_mp": a.c_gf_mp, "C_GF_pm": a.c_gf_pm, "C_GF_mm": a.c_gf_mm,
        "C_GR_pp": a.c_gr_pp, "C_GR_mp": a.c_gr_mp, "C_GR_pm": a.c_gr_pm, "C_GR_mm": a.c_gr_mm,
        "improvability_gf": improver.improvability(m, "gf"),
        "improvability_gr": improver.improvability(m, "gr"),
    }


def cmd_eval(args) -> str:
    m, _ = _measurement(args)
    rec = evaluate(m)
    if args.out_format == "csv":
        rows = []
        for k, v in rec.items():
            if k == "lambdas":
                rows += [(f"lambda{i + 1}", x) for i, x in enumerate(v)]
            else:
                rows.append((k, v))
        return _csv(("quantity", "value"), rows)
    return _json(rec)


def cmd_scatter(args) -> str:
    m, pp = _measurement(args)
    pair = _pair(args, pp)
    _positive(args.eps, "--eps")
    if args.count < 0:
        raise UsageError("--count must be nonnegative")
    pts = correlation.scatter_dataset(m, pair, args.count, args.eps, args.seed,
                                      max_attempts=args.max_attempts)
    rows = [(i, x, y) for i, (x, y) in enumerate(pts)]
    return _table(("index", "dg", "dd"), rows, args.out_format)


def cmd_region(args) -> str:
    m, pp = _measurement(args)
    pair = _pair(args, pp)
    if args.count < 2:
        raise UsageError("--count must be at least 2")
    gb = correlation.gamma_boundary(m, pair, n_points=args.count)
    rows = []
    for arc in gb.arcs:
        rows += [(arc.segment, t, x, y) for t, (x, y) in zip(arc.t, arc.points)]
    sig = correlation.sigma_for(m, pair, n_points=4 * args.count)
    ts = np.linspace(0.0, 1.0, sig.points.shape[0])
    rows += [("Sigma", t, x, y) for t, (x, y) in zip(ts, sig.points)]
    return _table(("segment", "t", "x", "y"), rows, args.out_format)


def cmd_range(args) -> str:
    if args.d < 2:
        raise UsageError("--d must be at least 2")
    if args.count < 2:
        raise UsageError("--count must be at least 2")
    pair = args.pair or "gf"
    rows = []
    for curve in correlation.coefficient_range_curves(args.d, pair, args.count):
        rows += [(curve.family, t, g, c) for t, g, c in zip(curve.param, curve.g, curve.c)]
    return _table(("family", "param", "G", "C"), rows, args.out_format)


def cmd_improve(args) -> str:
    m, pp = _measurement(args)
    pair = _pair(args, pp)
    _positive(args.eps, "--eps")
    if args.max_iter < 0:
        raise UsageError("--max-iter must be nonnegative")
    traj = improver.improve(m, pair, args.eps, args.max_iter, args.conv_tol)
    last = traj[-1]
    if improver.CONVERGED not in last.events:
        status = "stopped at --max-iter"
    elif last.improvability > args.conv_tol:
        status = "singular point, no improving direction"
    else:
        status = "converged"
    print(f"{status} after {last.iteration} steps, improvability {last.improvability:.3g}",
          file=sys.stderr)
    header = (["iter"] + [f"lambda{i + 1}" for i in range(m.d)]
              + ["G", "D", "improvability", "nd", "events"])
    rows = [[r.iteration, *r.lambdas, r.metric_g, r.metric_d, r.improvability, r.nd,
             "|".join(sorted(r.events))] for r in traj]
    return _table(header, rows, args.out_format)


def _check_formulas(m, args):
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    mc = oracle.haar_mc_metrics(m, args.samples, args.seed)
    exact = oracle.closed_form_metrics(m)
    return (("quantity", "closed_form", "mc_value", "std_error", "z_score"),
            [(k, exact[k], est.value, est.std_error, est.z_score(exact[k]))
             for k, est in mc.as_dict().items()])


def _check_gradients(m, args):
    ds = direction_set(m)
    fd = oracle.finite_difference_gradients(m)
    rows = []
    for name, exact, approx in zip("GFR", (ds.grad_g, ds.grad_f, ds.grad_r), fd):
        for i, (a, b) in enumerate(zip(exact, approx)):
            rows.append((f"d{name}/dlambda{i + 1}", a, b, abs(a - b)))
    return ("quantity", "closed_form", "fd_value", "abs_error"), rows


def _check_directions(m, args):
    ds = direction_set(m)
    analytic = {("G", "ascent"): (ds.g_plus, ds.grad_g), ("G", "descent"): (ds.g_minus, ds.grad_g),
                ("F", "ascent"): (ds.f_plus, ds.grad_f), ("F", "descent"): (ds.f_minus, ds.grad_f),
                ("R", "ascent"): (ds.r_plus, ds.grad_r), ("R", "descent"): (ds.r_minus, ds.grad_r)}
    dirs = max(args.samples, 1)
    rows = []
    for (target, sense), (vec, grad) in analytic.items():
        res = oracle.brute_force_steepest(m, target, sense, dirs, args.seed)
        rows.append((f"{target}_{sense}", float(vec @ grad), res.value,
                     float(vec @ res.direction)))
    return ("quantity", "analytic_rate", "search_rate", "dot"), rows


def _check_region(m, args, pair):
    rep = oracle.region_membership_check(m, pair, args.count, args.seed, args.eps)
    return (("quantity", "value"),
            [("points", rep.points), ("outside_gamma", rep.outside_gamma),
             ("vertices", rep.vertices), ("outside_sigma", rep.outside_sigma),
             ("slack", rep.slack)])


def cmd_oracle(args) -> str:
    m, pp = _measurement(args)
    if args.check == "formulas":
        header, rows = _check_formulas(m, args)
    elif args.check == "gradients":
        try:
            header, rows = _check_gradients(m, args)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    elif args.check == "directions":
        header, rows = _check_directions(m, args)
    else:
        _positive(args.eps, "--eps")
        header, rows = _check_region(m, args, _pair(args, pp))
    return _table(header, rows, args.out_format)


HANDLERS = {"eval": cmd_eval, "scatter": cmd_scatter, "region": cmd_region,
            "range": cmd_range, "improve": cmd_improve, "oracle": cmd_oracle}


def _first_command(argv: Sequence[str]) -> str | None:
    for tok in argv:
        if not tok.startswith("-"):
            return tok
        if tok in ("-h", "--help"):
            return None
    return None


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    cmd = _first_command(argv)
    if cmd is not None and cmd not in COMMANDS:
        print(f"qtradeoff: unknown subcommand {cmd!r} (choose from {', '.join(COMMANDS)})",
              file=sys.stderr)
        return EXIT_UNKNOWN_COMMAND
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    try:
        text = HANDLERS[args.command](args)
    except (InvalidMeasurementError, UsageError) as exc:
        print(f"qtradeoff {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except correlation.RejectionBudgetError as exc:
        print(f"qtradeoff {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
