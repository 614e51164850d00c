"""Command line front end.

Exit codes: 0 when every record passes (or is vacuous), 1 when a record
fails, 2 for configuration and argument errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import verify as V
from .chart import ChartError, builtin_surface, chart_from_spec
from .expr import ExpressionError
from .integrals import ExtrinsicRegion, norm_report
from .intrinsic import IntrinsicError, intrinsic_ball
from .records import ProbeRecord
from .resolution import DEFAULT
from .suite import ConfigError, RunConfig, base_from_spec, default_config, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

RECORD_COLUMNS = ("check", "id", "relation", "lhs", "rhs", "residual", "tolerance", "verdict")


def fmt(x) -> str:
    """17 significant digits, C-locale decimal point; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])


def _floats(text: str):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


def _surface(text: str):
    """A builtin name, ``name:json-params``, a JSON chart spec or a path to one."""
    p = Path(text)
    if p.suffix == ".json" and p.exists():
        return chart_from_spec(json.loads(p.read_text()))
    text = text.strip()
    if text.startswith("{"):
        return chart_from_spec(json.loads(text))
    name, _, params = text.partition(":")
    return builtin_surface(name, json.loads(params) if params else {})


# ---------------------------------------------------------------------------
# commands


def cmd_verify(args) -> int:
    try:
        if args.config:
            config = RunConfig.load(args.config, args.resolution_scale)
        else:
            config = RunConfig.from_dict(default_config(), args.resolution_scale)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    def progress(label, recs):
        for r in recs:
            if isinstance(r, ProbeRecord):
                print(f"  probe  {label}: s={r.s:g} s2A0={r.s2A0:.6g} total_curv={r.total_curv:.6g}")
            else:
                print(f"  {r.verdict:<7} {label} {r.id}: residual={r.residual:.3e} tol={r.tolerance:.3e}")

    report = run_suite(config, progress if not args.quiet else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = {"json": "report.json", "csv": "records.csv", "probe_csv": "probes.csv", **config.output}
    (out / names["json"]).write_text(json.dumps(report.to_dict(), indent=2, default=str) + "\n")
    rows = [dict(check=name, **{k: getattr(r, k) for k in RECORD_COLUMNS[1:]})
            for name, r in report.records if not isinstance(r, ProbeRecord)]
    write_csv(out / names["csv"], RECORD_COLUMNS, rows)
    probes = [r.to_dict() for _, r in report.records if isinstance(r, ProbeRecord)]
    write_csv(out / names["probe_csv"], ProbeRecord.CSV_COLUMNS, probes)
    s = report.summary
    print(f"pass={s['pass']} fail={s['fail']} vacuous={s['vacuous']} probes={s['probe']}")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_counterexample(args) -> int:
    if not 0 < args.alpha < 0.5:
        print("error: alpha must lie in (0, 1/2)", file=sys.stderr)
        return EXIT_CONFIG
    if not args.eps or any(not 0 < e <= 0.5 for e in args.eps):
        print("error: eps values must lie in (0, 1/2]", file=sys.stderr)
        return EXIT_CONFIG
    res = DEFAULT.scaled(args.resolution_scale)
    sweep = V.counterexample_sweep(args.alpha, args.eps, res)
    if args.out:
        write_csv(args.out, V.SweepResult.CSV_COLUMNS, sweep.rows)
    else:
        print(",".join(V.SweepResult.CSV_COLUMNS))
        for row in sweep.rows:
            print(",".join(fmt(row[c]) for c in V.SweepResult.CSV_COLUMNS))
    for r in sweep.records:
        print(f"{r.verdict:<7} {r.id}", file=sys.stderr)
    return EXIT_OK if all(r.verdict != "fail" for r in sweep.records) else EXIT_FAIL


def _family(text: str):
    """A JSON list of chart specs (inline or in a file), or a single surface."""
    p = Path(text)
    src = p.read_text() if p.exists() else text
    src = src.strip()
    if src.startswith("["):
        items = json.loads(src)
        out = []
        for item in items:
            chart = chart_from_spec(item) if isinstance(item, dict) else _surface(item)
            out.append((chart, item.get("base") if isinstance(item, dict) else None))
        return out
    return [(_surface(text), None)]


def cmd_probe(args) -> int:
    try:
        family = _family(args.family)
    except (ChartError, ExpressionError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = DEFAULT.scaled(args.resolution_scale)
    rows = []
    for chart, base_spec in family:
        try:
            base = base_from_spec(chart, base_spec) if (base_spec or chart.origin_param) else _any_base(chart)
        except (ChartError, ConfigError) as exc:
            print(f"skip {chart.label}: {exc}", file=sys.stderr)
            continue
        for s in args.s:
            try:
                rec = V.theorem_probe(chart, base, s, args.p, res)
            except (IntrinsicError, ValueError) as exc:
                print(f"skip {chart.label} s={s:g}: {exc}", file=sys.stderr)
                continue
            rows.append(rec.to_dict())
    if args.out:
        write_csv(args.out, ProbeRecord.CSV_COLUMNS, rows)
    else:
        print(",".join(ProbeRecord.CSV_COLUMNS))
        for row in rows:
            print(",".join(fmt(row[c]) for c in ProbeRecord.CSV_COLUMNS))
    return EXIT_OK


def _any_base(chart):
    u0, u1, v0, v1 = chart.domain.bbox
    return ((u0 + u1) / 2, (v0 + v1) / 2)


def cmd_norms(args) -> int:
    try:
        chart = _surface(args.surface)
    except (ChartError, ExpressionError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = DEFAULT.scaled(args.resolution_scale)
    if args.ball == "whole":
        region = ExtrinsicRegion(chart, resolution=res)
    elif args.ball == "extrinsic":
        region = ExtrinsicRegion(chart, args.s, resolution=res)
    else:
        base = chart.origin_param or _any_base(chart)
        region = intrinsic_ball(chart, base, args.s, res)
    nr = norm_report(chart, region, args.p, args.s)
    print(json.dumps(nr.to_dict(), indent=2, default=str))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvlab", description="Curvature and mean value verification lab.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run a configured suite of checks")
    p.add_argument("--config", help="JSON run configuration (default: the shipped suite)")
    p.add_argument("--out", default="curvlab-out", help="output directory")
    p.add_argument("--resolution-scale", type=float, default=1.0)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("counterexample", help="norm sweep of the counterexample family")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=_floats, required=True, help="comma or space separated list")
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.add_argument("--resolution-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("probe", help="theorem probes over a surface family")
    p.add_argument("--family", required=True, help="surface spec, JSON list of chart specs, or a file")
    p.add_argument("--s", type=_floats, required=True)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.add_argument("--resolution-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("norms", help="scale invariant norms of H on one surface")
    p.add_argument("--surface", required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--ball", choices=("intrinsic", "extrinsic", "whole"), default="intrinsic")
    p.add_argument("--resolution-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_norms)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.resolution_scale <= 0:
        print("error: --resolution-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
