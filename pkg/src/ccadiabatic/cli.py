"""Command line entry point: ``python -m ccadiabatic <command> ...``."""

import argparse
import csv
import io
import json
import sys

from . import paths as pth
from .harness import build_family, build_path, load_config, rows_to_csv, run_sweep
from .querycost import CostParams, lambda_smooth, query_bound, report_table
from .schemes import four_unitary_scheme, solve_complete, solve_partial, symmetric_all
from .spectral import track


def _family_args(p):
    p.add_argument("--family", default="search", help="search | sin_bridge | linear_interp | custom_table")
    p.add_argument("--N", type=int, default=5, help="dimension for search")
    p.add_argument("--H0", help="matrix file for file-based families")
    p.add_argument("--H1", help="matrix file for file-based families")


def _path_args(p):
    p.add_argument("--path", default="linear", help="linear | smoothstep | lae | json")
    p.add_argument("--path-N", type=int, default=5, help="N of the LAE path")
    p.add_argument("--path-file", help="JSON path record for --path json")


def _family(a):
    return build_family({"kind": a.family, "n": a.N, "h0": a.H0, "h1": a.H1})


def _path(a):
    return build_path({"kind": a.path, "n": a.path_N, "file": a.path_file})


def cmd_sweep(a):
    cfg = load_config(a.config)
    if a.csv:
        cfg.output = a.csv
    rows, fits = run_sweep(cfg)
    levels = cfg.levels or [int(cfg.scheme.get("level", 1))]
    sys.stdout.write(rows_to_csv(rows, levels))
    print(f"# amplitude_slope {fits['amplitude_slope']:.4f}", file=sys.stderr)
    return 1 if any(r.failure for r in rows) else 0


def cmd_paths(a):
    base = _path(a)
    if a.dual == "partial":
        path = pth.partial_antisym_dual(base, a.delta)
    elif a.dual == "complete":
        path = pth.complete_antisym_dual(base, a.delta)
    elif a.dual == "bc":
        path = pth.bc_dual(base, a.m, a.delta)
    else:
        path = base
    if a.reverse:
        path = pth.time_reversed(path)
    if a.format == "json":
        print(path.to_json())
    elif a.format == "csv":
        sys.stdout.write(pth.sample_csv(path, a.points))
    else:
        rep = pth.validate(path)
        print(f"f(0) = {rep.f0!r}\nf(1) = {rep.f1!r}")
        print(f"range = [{rep.f_min:.6g}, {rep.f_max:.6g}]  monotone = {rep.monotone}")
        for b, dv, ds, dc in rep.join_defects:
            print(f"join s={b:.6g}: value {dv:.3g} slope {ds:.3g} curvature {dc:.3g}")
        res = getattr(path, "system_residuals", None)
        if res is not None:
            print(f"max linear-system residual = {float(max(res(), default=0.0)):.3g}")
        print("valid" if rep.ok else "INVALID")
        return 0 if rep.ok else 1
    return 0


def cmd_track(a):
    tr = track(_family(a), _path(a), a.points)
    levels = [int(x) for x in a.levels.split(",")] if a.levels else None
    sys.stdout.write(tr.to_csv(levels))
    return 0


def cmd_scheme(a):
    fam, f_A = _family(a), _path(a)
    if a.scheme == "partial":
        sol = solve_partial(fam, f_A, a.T, a.level, a.n or 0, a.delta)
    elif a.scheme == "complete":
        sol = solve_complete(fam, f_A, a.T, a.level, a.n, a.delta, m=a.m)
    elif a.scheme == "symmetric_all":
        sol = symmetric_all(fam, f_A, a.delta, a.T)
    elif a.scheme == "four_unitary":
        sol = four_unitary_scheme(fam, f_A, pth.partial_antisym_dual(f_A, a.delta), a.T)
    else:
        raise SystemExit(f"unknown scheme {a.scheme}")
    rec = sol.to_record()
    for br in rec["plan"]["branches"]:
        br.pop("path")
    print(json.dumps(rec, indent=2, sort_keys=True))
    return 0


def cmd_querycost(a):
    Lam = a.Lam
    if Lam is None:
        Lam = lambda_smooth(_family(a), _path(a), 2 * a.k, time_scale=a.maxT)
    p = CostParams(M=a.M, d=a.d, k=a.k, Lam=Lam, maxT=a.maxT, eps=a.eps, L=a.L, n=a.n,
                   n_H=a.n_H, Gamma=a.Gamma, N_T=a.N_T)
    rep = query_bound(p)
    rows = report_table(p, rep)
    if a.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value"])
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            print(f"{k:<{width}}  {v}")
    return 0


def cmd_accept(a):
    from .acceptance import run_acceptance

    which = {int(x) for x in a.only.split(",")} if a.only else None
    results = run_acceptance(which)
    if a.json:
        with open(a.json, "w") as fh:
            json.dump([{"criterion": r.number, "name": r.name, "passed": r.passed, "seconds": r.seconds,
                        "details": repr(r.details)} for r in results], fh, indent=2)
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="ccadiabatic", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a T sweep from an INI config and print CSV")
    p.add_argument("config")
    p.add_argument("--csv", help="also write the CSV to this file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("paths", help="build, validate or dump a schedule path")
    _path_args(p)
    p.add_argument("--dual", choices=["none", "partial", "complete", "bc"], default="none")
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--reverse", action="store_true")
    p.add_argument("--format", choices=["report", "json", "csv"], default="report")
    p.add_argument("--points", type=int, default=1001)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("track", help="dump the tracked spectrum as CSV")
    _family_args(p)
    _path_args(p)
    p.add_argument("--points", type=int, default=257)
    p.add_argument("--levels", help="comma-separated labels for gap columns")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("scheme", help="solve a cancellation scheme and print it as JSON")
    _family_args(p)
    _path_args(p)
    p.add_argument("--scheme", default="partial", choices=["partial", "complete", "symmetric_all", "four_unitary"])
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, default=0)
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("querycost", help="evaluate the query-count bound")
    _family_args(p)
    _path_args(p)
    for name, typ, default in (("M", int, 1), ("d", int, 1), ("k", int, 2), ("maxT", float, 100.0),
                               ("eps", float, 1e-3), ("L", int, 1), ("n", int, 3), ("n_H", int, 32),
                               ("Gamma", float, 1.0), ("N_T", int, 32)):
        p.add_argument(f"--{name}", type=typ, default=default)
    p.add_argument("--Lam", type=float, help="smoothness constant; estimated from the family and path if omitted")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_querycost)

    p = sub.add_parser("accept", help="run the acceptance criteria")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--json", help="write a machine-readable report here")
    p.set_defaults(func=cmd_accept)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"ccadiabatic {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
