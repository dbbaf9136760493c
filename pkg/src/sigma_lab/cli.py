"""Command-line entry point: ``sigma-lab {metric,opnorm,detect,indep,gallery,fuzz}``.

Exit codes: 0 when every expected claim holds, 1 when one fails, 2 for usage
errors (bad arguments, malformed documents, violated preconditions, budget
exceedances).
"""

from __future__ import annotations

import argparse
import sys

from . import gallery
from .detect import MODES, detect, parse_modes
from .errors import BudgetExceeded, SigmaLabError
from .fuzz import CHECKS, FuzzConfig, parse_checks, run_fuzz
from .independence import is_cond_independent
from .io import (load_json, partition_from_json, rv_to_json, scenario_from_json,
                 space_from_json, value_to_json)
from .metrics import hausdorff
from .opnorm import op_norm, parse_exponent
from .report import RunReport, claims_to_json, convergence_report_to_json, emit_series, file_digest, series_rows

EXIT_OK, EXIT_CLAIM, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load_space(path):
    return space_from_json(load_json(path), where=str(path))


def _load_partition(path, space):
    return partition_from_json(load_json(path), space, where=str(path))


def _digests(*paths):
    return {str(p): file_digest(p) for p in paths if p}


def _exponent(text):
    try:
        return parse_exponent(text)
    except (ValueError, ZeroDivisionError, SigmaLabError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _emit(report, out):
    text = report.dumps()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------------

def cmd_metric(args, argv):
    space = _load_space(args.space)
    a = _load_partition(args.a, space)
    b = _load_partition(args.b, space)
    m = hausdorff(a, b, approx=args.approx)
    result = {"rho_ab": value_to_json(m.rho_ab), "rho_ba": value_to_json(m.rho_ba),
              "D": value_to_json(m.D), "delta": value_to_json(m.delta),
              "witness_a": list(m.witness_a.members()), "witness_b": list(m.witness_b.members()),
              "exact": m.exact, "label": m.label}
    _emit(RunReport(argv, _digests(args.space, args.a, args.b), result,
                    provenance=["sup over events of one field of the inf over the other of P(E ^ F)"]), args.out)
    return EXIT_OK


def cmd_opnorm(args, argv):
    if args.q > args.p:
        raise UsageError(f"q = {args.q} exceeds p = {args.p}; the operator norm needs q <= p")
    space = _load_space(args.space)
    a = _load_partition(args.a, space)
    b = _load_partition(args.b, space)
    r = op_norm(space, a, b, args.p, args.q, approx=args.approx, method=args.method)
    result = {"p": str(args.p), "q": str(args.q), "value": value_to_json(r.value), "exact": r.exact,
              "method": r.method, "lower": value_to_json(r.lower),
              "upper": value_to_json(r.upper) if r.upper is not None else None,
              "estimate": r.estimate, "witness_f": rv_to_json(r.witness_f)["values"],
              "witness_ratio": value_to_json(r.witness_ratio) if r.witness_ratio is not None else None,
              "label": "exact" if r.exact else "CERTIFIED BOUNDS", "notes": list(r.notes)}
    _emit(RunReport(argv, _digests(args.space, args.a, args.b), result,
                    provenance=["sup of ||P_A f - P_B f||_q over ||f||_p <= 1"]), args.out)
    return EXIT_OK


def _write_series(report, csv_path):
    if csv_path:
        emit_series(report, csv_path)


def cmd_detect(args, argv):
    scen = scenario_from_json(load_json(args.scenario), where=str(args.scenario))
    horizon = args.horizon
    if horizon is None and scen.name in gallery.ENTRIES:
        horizon = gallery.ENTRIES[scen.name].default_horizon
    # explicit scenarios with no horizon run every listed stage
    if horizon is not None and horizon < getattr(scen, "min_horizon", 1):
        raise UsageError(f"scenario {scen.name} needs horizon >= {scen.min_horizon}")
    mat = scen.materialize(horizon)
    rep = detect(mat, parse_modes(args.modes), args.p, args.q, approx=args.approx)
    _write_series(rep, args.csv)
    run = RunReport(argv, _digests(args.scenario), convergence_report_to_json(rep), dict(rep.verdicts),
                    series_rows(rep), provenance=[f"{m} statistic" for m in rep.modes])
    _emit(run, args.out)
    return EXIT_OK


def cmd_indep(args, argv):
    space = _load_space(args.space)
    paths = [p for p in args.family.split(",") if p]
    if not paths:
        raise UsageError("--family needs at least one partition document")
    family = [_load_partition(p, space) for p in paths]
    given = _load_partition(args.given, space) if args.given else None
    cert = is_cond_independent(space, family, given)
    result = {"holds": cert.holds, "checked": cert.checked, "description": cert.describe()}
    if not cert.holds:
        atoms, c, lhs, rhs = cert.violating_tuple
        result["violating_tuple"] = {"atoms": list(atoms), "given_atom": c,
                                     "lhs": value_to_json(lhs), "rhs": value_to_json(rhs)}
    ok = args.expect is None or (args.expect == "independent") == cert.holds
    _emit(RunReport(argv, _digests(args.space, args.given, *paths), result, ok=ok,
                    provenance=["P(a_1 & .. & a_k & c) P(c)^(k-1) = prod P(a_i & c) on atoms"]), args.out)
    return EXIT_OK if ok else EXIT_CLAIM


def cmd_gallery(args, argv):
    if args.action == "list":
        for name, entry in gallery.ENTRIES.items():
            print(f"{name:24s} horizon {entry.default_horizon:3d}  {entry.describes}")
        return EXIT_OK
    if not args.name:
        raise UsageError("gallery run needs an entry name")
    res = gallery.run(args.name, horizon=args.horizon, p=args.p, q=args.q,
                      modes=parse_modes(args.modes) if args.modes else None)
    _write_series(res.report, args.csv)
    result = convergence_report_to_json(res.report)
    result["claims"] = claims_to_json(res.claims)
    run = RunReport(argv, {}, result, dict(res.report.verdicts), series_rows(res.report),
                    provenance=[c.source for c in res.claims], ok=res.ok)
    _emit(run, args.out)
    for c in res.claims:
        print(f"{'PASS' if c.holds else 'FAIL'} {c.name}", file=sys.stderr)
    return EXIT_OK if res.ok else EXIT_CLAIM


def cmd_fuzz(args, argv):
    checks = parse_checks(args.checks) if args.checks else tuple(CHECKS)
    cfg = FuzzConfig(seed=args.seed, trials=args.trials, min_outcomes=args.min_outcomes,
                     max_outcomes=args.max_outcomes, min_atoms=args.min_atoms, max_atoms=args.max_atoms,
                     checks=checks, shrink=not args.no_shrink, workers=args.workers)
    rep = run_fuzz(cfg)
    doc = rep.to_json()
    run = RunReport(argv, {}, doc, ok=rep.ok, provenance=[f"fuzz check {c}" for c in checks])
    text = run.dumps()
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    for name, s in rep.stats.items():
        print(f"{name:20s} passed {s.passed:5d}  failed {s.failed:3d}  errors {s.errors:3d}  "
              f"discarded {s.discarded:4d}")
    return EXIT_OK if rep.ok else EXIT_CLAIM


# -- parser --------------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="sigma-lab",
                                     description="Exact convergence diagnostics for sub-sigma-fields of finite spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def pair_args(p):
        p.add_argument("--space", required=True, help="space document (JSON)")
        p.add_argument("--a", required=True, help="first partition document")
        p.add_argument("--b", required=True, help="second partition document")
        p.add_argument("--approx", action="store_true",
                       help="allow labeled approximations above the exact enumeration limit")
        p.add_argument("--out", help="also write the JSON report here")

    p = sub.add_parser("metric", help="Hausdorff-type distances between two sigma-fields")
    pair_args(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("opnorm", help="||P_A - P_B|| from L^p to L^q")
    pair_args(p)
    p.add_argument("--p", type=_exponent, default=parse_exponent(2), help="source exponent (1..oo, default 2)")
    p.add_argument("--q", type=_exponent, default=None, help="target exponent (default: p)")
    p.add_argument("--method", default=None, help="force a method (see the README)")
    p.set_defaults(func=cmd_opnorm)

    p = sub.add_parser("detect", help="per-stage convergence statistics for a scenario")
    p.add_argument("--scenario", required=True, help="scenario document (JSON)")
    p.add_argument("--modes", default="WC,SC,HC,ONC,ASC,OC", help=f"comma list from {','.join(MODES)}")
    p.add_argument("--p", type=_exponent, default=parse_exponent(2))
    p.add_argument("--q", type=_exponent, default=parse_exponent(2))
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--approx", action="store_true")
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--csv", help="CSV series path (an .exact.json sidecar is written next to it)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("indep", help="exact conditional independence of partitions")
    p.add_argument("--space", required=True)
    p.add_argument("--family", required=True, help="comma-separated partition documents")
    p.add_argument("--given", help="conditioning partition (default: trivial)")
    p.add_argument("--expect", choices=("independent", "dependent"),
                   help="exit 1 unless the verdict matches")
    p.add_argument("--out")
    p.set_defaults(func=cmd_indep)

    p = sub.add_parser("gallery", help="built-in scenarios with expected claims")
    p.add_argument("action", choices=("list", "run"))
    p.add_argument("name", nargs="?", help="entry to run")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--p", default=None, help="exponent (the Bernoulli-pair entry uses p = q)")
    p.add_argument("--q", default=None)
    p.add_argument("--modes", default=None)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("fuzz", help="seeded randomized property checks")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--checks", default=None, help=f"comma list from {','.join(CHECKS)}")
    p.add_argument("--min-outcomes", type=int, default=2)
    p.add_argument("--max-outcomes", type=int, default=6)
    p.add_argument("--min-atoms", type=int, default=1)
    p.add_argument("--max-atoms", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-shrink", action="store_true")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "command", None) == "opnorm" and args.q is None:
        args.q = args.p
    try:
        return args.func(args, ["sigma-lab"] + argv)
    except UsageError as exc:
        print(f"sigma-lab: error: {exc}", file=sys.stderr)
    except BudgetExceeded as exc:
        print(f"sigma-lab: budget exceeded: {exc}", file=sys.stderr)
    except SigmaLabError as exc:
        print(f"sigma-lab: error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
