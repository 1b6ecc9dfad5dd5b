"""Command-line interface: ``kpos <command> ...``.

Exit codes: 0 success, 2 usage or bad input, 3 numerical failure,
4 inconclusive cone verdict. ``verify`` returns 3 when any criterion fails.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import acceptance, bounds
from .cones import SeeSawConfig, Verdict, is_k_peb, is_k_positive
from .errors import KposError, NumericalError
from .maps import CovariantMap, is_covariant, parse_map_spec, project_covariant, to_superop
from .norms import cb_norm, dec_norm_covariant, diamond_norm, trace_lower_bound
from .randgen import empirical_d_lower, mean_width_trace_ball

SCHEMA = "kpos/1"
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_INCONCLUSIVE = 0, 2, 3, 4


def _round(obj):
    """Recursively round floats to 9 significant digits for printing."""
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(f"{x:.9g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(doc, out):
    out.write(json.dumps(_round(doc), indent=2) + "\n")


def cmd_bounds(args, out):
    rows = bounds.table(range(1, args.n_max + 1), range(1, args.k_max + 1), args.c)
    if args.format == "json":
        _emit(bounds.to_json(rows), out)
    else:
        out.write(bounds.to_csv(rows))
    return EXIT_OK


def cmd_norm(args, out):
    phi = parse_map_spec(args.map, args.n, args.k)
    sup = to_superop(phi)
    doc = {"schema": SCHEMA, "map": args.map, "n_in": sup.n_in, "n_out": sup.n_out,
           "which": args.which}
    if args.which == "dec":
        if not isinstance(phi, CovariantMap):
            if not is_covariant(sup):
                raise KposError("dec norm is only available for covariant maps")
            phi = project_covariant(sup)
        cone_k = args.dec_k or phi.n
        doc["cone_k"] = cone_k
        doc["value"] = dec_norm_covariant(phi.n, cone_k, phi.s, phi.t)
    else:
        fn = cb_norm if args.which == "cb" else diamond_norm
        value, res = fn(sup, full_output=True)
        doc["value"] = value
        doc["trace_lower_bound"] = trace_lower_bound(sup)
        if res is not None:
            doc["solver"] = {"status": res.status.value, "iterations": res.iterations,
                             "gap": res.gap}
    _emit(doc, out)
    return EXIT_OK


def cmd_check(args, out):
    k_map = args.map_k if args.map_k is not None else args.k
    phi = parse_map_spec(args.map, args.n, k_map)
    cfg = SeeSawConfig(seed=args.seed)
    test = is_k_positive if args.cone == "kpos" else is_k_peb
    verdict = test(phi, args.k, cfg)
    doc = verdict.to_json()
    doc.update({"map": args.map, "k": args.k, "cone": args.cone})
    _emit(doc, out)
    return EXIT_INCONCLUSIVE if verdict.verdict == Verdict.INCONCLUSIVE else EXIT_OK


def cmd_sample(args, out):
    report = empirical_d_lower(args.n, args.k, args.samples, args.seed,
                               max_seconds=args.max_seconds)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    _emit(report.to_json(), out)
    return EXIT_OK


def cmd_gue_width(args, out):
    mean, se = mean_width_trace_ball(args.p, args.samples, args.seed)
    bound = 2.0 * math.sqrt(args.p)
    _emit({"schema": SCHEMA, "p": args.p, "samples": args.samples, "seed": args.seed,
           "mean": mean, "standard_error": se, "ratio_to_sqrt_p": mean / math.sqrt(args.p),
           "two_sqrt_p": bound, "bound_holds": mean <= bound}, out)
    return EXIT_OK


def cmd_verify(args, out):
    def echo(line):
        out.write(line + "\n")
        out.flush()

    numbers = {int(x) for x in args.only.split(",")} if args.only else None
    results = acceptance.run_all(quick=args.quick, numbers=numbers, echo=echo)
    passed = sum(r.ok for r in results)
    echo(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_NUMERICAL


def build_parser():
    p = argparse.ArgumentParser(prog="kpos", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="table of r_k and d_k bounds")
    b.add_argument("--n-max", type=int, required=True)
    b.add_argument("--k-max", type=int, required=True)
    b.add_argument("--c", type=float, default=bounds.DEFAULT_C)
    b.add_argument("--format", choices=["csv", "json"], default="csv")
    b.set_defaults(func=cmd_bounds)

    n = sub.add_parser("norm", help="cb, diamond or decomposition norm of a map")
    n.add_argument("--map", required=True,
                   help="tomiyama[:k] | transpose | identity | covariant:s,t | file:<path>")
    n.add_argument("--which", choices=["cb", "diamond", "dec"], default="cb")
    n.add_argument("--n", type=int)
    n.add_argument("--k", type=int, help="parameter of the tomiyama map")
    n.add_argument("--dec-k", type=int, help="cone index for --which dec (default n)")
    n.set_defaults(func=cmd_norm)

    c = sub.add_parser("check", help="k-positivity or k-PEB membership")
    c.add_argument("--map", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--n", type=int)
    c.add_argument("--map-k", type=int, help="tomiyama parameter if different from --k")
    c.add_argument("--cone", choices=["kpos", "kpeb"], default="kpos")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("sample", help="empirical lower bound on d_k(M_n)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--csv", help="write per-sample rows to this file")
    s.add_argument("--max-seconds", type=float)
    s.set_defaults(func=cmd_sample)

    g = sub.add_parser("gue-width", help="Monte-Carlo E||G|| for GUE matrices")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--samples", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.set_defaults(func=cmd_gue_width)

    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--quick", action="store_true")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args, out)
    except NumericalError as exc:
        _emit({"schema": SCHEMA, "error": str(exc), "diagnostics": exc.diagnostics}, sys.stderr)
        return EXIT_NUMERICAL
    except (KposError, OSError, ValueError, TypeError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"kpos: error: {exc}\n")
        return EXIT_USAGE
