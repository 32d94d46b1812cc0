"""Command-line entry point ``simapprox``.

Subcommands
-----------
map      capacity, Laurent coefficients and level-curve CSV of a domain
approx   one pipeline run at a single degree
fekete   approximate Fekete points with spacing and equilibrium diagnostics
sweep    a pipeline sweep over a degree list (config file plus flag overrides)
verify   acceptance checks, optionally with a kernel decay CSV
report   regenerate CSV/SVG files from a saved report JSON

Exit codes: 0 when every asserted rule passes, 2 when a numerical rule
fails, 1 on an execution error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import SimApproxError

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with an [experiment] section")
    p.add_argument("--domain", help="builtin name, disk:cx,cy,r, segment:..., polygon:... or JSON")
    p.add_argument("--function", help="pole:a | branch:beta,z0 | logfac:z0 | entire")
    p.add_argument("--theorem", choices=("1", "2d", "3"))
    p.add_argument("--k", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--nodes", help="equispaced:N | fekete:N | boundary:N | list:z1;z2;...")
    p.add_argument("--samples", type=int, help="boundary samples for the ratio table")
    p.add_argument("--compacts", help="semicolon-separated disks disk:cx,cy,r")
    p.add_argument("--mode", choices=("fast", "constructive"))
    p.add_argument("--output", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-plots", dest="plots", action="store_false", default=None)


def _config_from_args(args, degrees):
    from .harness import ExperimentConfig, _parse_value
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    over = {name: getattr(args, name, None) for name in
            ("domain", "function", "theorem", "k", "r", "eps", "nodes", "samples", "mode",
             "output", "seed", "plots")}
    if args.compacts is not None:
        over["compacts"] = _parse_value("compacts", args.compacts)
    if degrees is not None:
        over["degrees"] = degrees
    return cfg.with_overrides(**over)


def _finish(report, quiet: bool = False) -> int:
    paths = report.write()
    if not quiet:
        for c in report.data.get("criteria", []):
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['value']:.6g} "
                  f"(threshold {c['threshold']:.6g})")
        if report.status == "failed":
            for e in report.data["errors"]:
                print(f"error: {e['type']}: {e['message']}", file=sys.stderr)
        for k, v in paths.items():
            print(f"wrote {k}: {v}")
    return report.exit_code


def cmd_map(args) -> int:
    from .conformal import build_map, level_curve
    from .geometry import parse_domain
    emap = build_map(parse_domain(args.domain))
    info = emap.to_dict()
    info["laurent"] = [[float(c.real), float(c.imag)] for c in np.asarray(emap.laurent(args.terms))]
    print(json.dumps(info, indent=2, sort_keys=True))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("delta", "theta", "re", "im"))
            for d in args.delta:
                lc = level_curve(emap, d, args.points)
                for th, z in zip(lc.theta, lc.points):
                    w.writerow([f"{d:.17g}", f"{th:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])
    return EXIT_OK


def cmd_fekete(args) -> int:
    from .conformal import build_map
    from .fekete import equilibrium_diagnostic, fekete_points, spacing_diagnostic
    from .geometry import parse_domain
    E = parse_domain(args.domain)
    S = fekete_points(E, args.N, grid=args.grid, seed=args.seed)
    emap = build_map(E)
    out = S.to_dict()
    out["spacing"] = spacing_diagnostic(emap, S).to_dict()
    out["ks_statistic"] = equilibrium_diagnostic(emap, S)
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness import run
    degrees = None
    if args.degrees:
        degrees = tuple(int(x) for x in args.degrees.split(","))
    return _finish(run(_config_from_args(args, degrees)), args.quiet)


def cmd_approx(args) -> int:
    from .harness import run
    return _finish(run(_config_from_args(args, (args.n,))), args.quiet)


def cmd_verify(args) -> int:
    from .acceptance import run_criteria
    ids = [int(x) for x in args.criteria.split(",")] if args.criteria else None
    results = run_criteria(ids, quick=args.quick)
    for r in results:
        print(r.line())
    if args.out:
        Path(args.out).write_text(json.dumps([r.to_dict() for r in results], indent=2,
                                             sort_keys=True, default=float) + "\n", newline="\n")
    if args.kernel_csv:
        from .conformal import build_map
        from .geometry import parse_domain
        from .kernels import KernelSpec, kernel_decay, powered_kernel
        emap = build_map(parse_domain(args.kernel_domain))
        zeta = complex(args.kernel_zeta)
        Q = powered_kernel(emap, KernelSpec.for_budget(args.kernel_n, args.kernel_k), zeta)
        dec = kernel_decay(emap, Q, zeta, args.kernel_n, args.kernel_k)
        with open(args.kernel_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("dist", "error", "bound"))
            for row in dec.rows():
                w.writerow([f"{v:.17g}" for v in row])
    if args.extension_csv:
        from .extension import cell_diagnostics, extend, primitive
        from .functions import branch
        from .geometry import builtin_domain
        D = builtin_domain("disk")
        ext = extend(primitive(branch(1.5, 1.0, D), D), D, 1, max_depth=args.extension_depth)
        with open(args.extension_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("re", "im", "d", "dbar", "bound", "ratio"))
            for row in cell_diagnostics(ext):
                w.writerow([f"{v:.17g}" for v in (*row["center"], row["d"], row["dbar"],
                                                   row["bound"], row["ratio"])])
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def cmd_report(args) -> int:
    from .harness import ApproxReport
    report = ApproxReport.from_json(Path(args.report).read_text())
    outdir = args.output or str(Path(args.report).parent)
    if report.status == "ok":
        report.write(outdir)
    print(f"status: {report.status}")
    for c in report.data.get("criteria", []):
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['value']}")
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simapprox", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="conformal map summary and level curves")
    p.add_argument("--domain", default="disk")
    p.add_argument("--terms", type=int, default=8, help="Laurent coefficients to print")
    p.add_argument("--delta", type=float, nargs="*", default=[0.1], help="level-curve deltas")
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--csv", help="write level curves (delta, theta, re, im)")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("approx", help="single pipeline run")
    _add_experiment_flags(p)
    p.add_argument("--n", type=int, required=True, help="degree (node count for theorem 3)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("fekete", help="approximate Fekete points")
    p.add_argument("--domain", default="disk")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fekete)

    p = sub.add_parser("sweep", help="pipeline sweep over degrees")
    _add_experiment_flags(p)
    p.add_argument("--degrees", help="comma-separated ascending degrees")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run acceptance checks")
    p.add_argument("--criteria", help="comma-separated criterion ids (default: all)")
    p.add_argument("--quick", action="store_true", help="skip the constructive run")
    p.add_argument("--out", help="write results JSON")
    p.add_argument("--kernel-csv", help="write a kernel decay table (dist, error, bound)")
    p.add_argument("--kernel-domain", default="disk")
    p.add_argument("--kernel-zeta", default="1")
    p.add_argument("--kernel-n", type=int, default=128)
    p.add_argument("--kernel-k", type=int, default=2)
    p.add_argument("--extension-csv", help="write per-cell dbar diagnostics for (1-z)^(3/2) on the disk")
    p.add_argument("--extension-depth", type=int, default=4)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="regenerate files from a report JSON")
    p.add_argument("report")
    p.add_argument("--output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SimApproxError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
