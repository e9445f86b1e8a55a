"""Command-line driver.

    levitube verify --suite all --seed 7 --json out.json
    levitube df-sweep --eta-min 0.3 --eta-max 0.7 --step 0.01 --csv sweep.csv
    levitube ergodic geodesic --time 1e5 --bins 8 --seed 3
    levitube ergodic boundary --words 1e6 --length 30 --grid 16
    levitube hardy level-integral --f const --t 0.5,1.0,1.4 --samples 1e6
    levitube hardy stokes --f zw --grid 8
    levitube hardy trend --f z --t 0.6,1.0,1.4,1.55
    levitube area --samples 1e7

Precedence is defaults < --config JSON < flags.  Exit codes: 0 when no check
fails, 1 when one does, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import checks, ergodic, fuchsian, hardy, tube
from .checks import CheckReport, RunConfig, report

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "seed": 7,
    "samples": None,
    "json": None,
    "csv": None,
    "config": None,
    "quiet": False,
    "timings": False,
    "workers": 4,
    "suite": "all",
    "eta_min": 0.3,
    "eta_max": 0.7,
    "step": 0.01,
    "time": 1e5,
    "dt": 0.1,
    "bins": 8,
    "words": 1_000_000,
    "length": 30,
    "grid": 16,
    "f": "const",
    "t": "0.5,1.0,1.4",
    "stokes_grid": 8,
}


class UsageError(Exception):
    pass


def count(text: str) -> int:
    """Sample counts may be written as 1e6."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if v < 1 or v != int(v):
        raise argparse.ArgumentTypeError(f"not a positive integer: {text!r}")
    return int(v)


def seed_type(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad list of numbers: {text!r}")


def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    g.add_argument("--seed", type=seed_type, default=s, help="root seed (default 7)")
    g.add_argument("--samples", type=count, default=s, help="override Monte Carlo sample counts")
    g.add_argument("--json", default=s, metavar="PATH", help="write the JSON report here")
    g.add_argument("--csv", default=s, metavar="PATH", help="write the CSV table here")
    g.add_argument("--config", default=s, metavar="PATH", help="flat JSON file of flag values")
    g.add_argument("--quiet", action="store_true", default=s, help="no table on stdout")
    g.add_argument("--timings", action="store_true", default=s, help="keep wall-clock runtimes in reports")
    g.add_argument("--workers", type=int, default=s, help="threads for verify (default 4)")
    return g


def build_parser() -> argparse.ArgumentParser:
    glob = _global_flags()
    s = argparse.SUPPRESS
    p = argparse.ArgumentParser(prog="levitube", parents=[glob], description="Numerical checks on the tube over a genus-2 surface.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[glob], help="run acceptance suites")
    v.add_argument("--suite", choices=list(checks.SUITES) + ["all"], default=s)

    d = sub.add_parser("df-sweep", parents=[glob], help="min eigenvalue of the Levi form of -delta^eta")
    d.add_argument("--eta-min", dest="eta_min", type=float, default=s)
    d.add_argument("--eta-max", dest="eta_max", type=float, default=s)
    d.add_argument("--step", type=float, default=s)

    e = sub.add_parser("ergodic", parents=[glob], help="geodesic or boundary-orbit experiments")
    esub = e.add_subparsers(dest="experiment", required=True)
    eg = esub.add_parser("geodesic", parents=[glob])
    eg.add_argument("--time", type=float, default=s)
    eg.add_argument("--dt", type=float, default=s)
    eg.add_argument("--bins", type=int, default=s)
    eb = esub.add_parser("boundary", parents=[glob])
    eb.add_argument("--words", type=count, default=s)
    eb.add_argument("--length", type=int, default=s)
    eb.add_argument("--grid", type=int, default=s)

    h = sub.add_parser("hardy", parents=[glob], help="level integrals, Stokes balance, gradient trend")
    hsub = h.add_subparsers(dest="experiment", required=True)
    for name in ("level-integral", "stokes", "trend"):
        hp = hsub.add_parser(name, parents=[glob])
        hp.add_argument("--f", default=s, help="const, z, w, zw, (z+w)/4 or blaschke")
        if name == "stokes":
            hp.add_argument("--grid", dest="stokes_grid", type=int, default=s)
        else:
            hp.add_argument("--t", default=s, help="comma-separated t values")

    sub.add_parser("area", parents=[glob], help="Monte Carlo area of the fundamental octagon")
    return p


def resolve(argv) -> dict:
    args = vars(build_parser().parse_args(argv))
    opts = dict(DEFAULTS)
    path = args.get("config")
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}")
        if not isinstance(loaded, dict):
            raise UsageError("config must be a flat JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys {unknown}")
        opts.update(loaded)
    opts.update(args)
    return opts


# -- output -------------------------------------------------------------------


def reports_json(reports: list[CheckReport]) -> str:
    body = {"schema": SCHEMA, "reports": [r.to_dict() for r in sorted(reports, key=lambda r: r.name)]}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def reports_csv(reports: list[CheckReport]) -> str:
    buf = io.StringIO()
    fields = ["name", "status", "value", "expected", "tolerance", "samples", "seed", "runtime_ms"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in sorted(reports, key=lambda r: r.name):
        d = r.to_dict()
        w.writerow([json.dumps(d[k]) if isinstance(d[k], list) else ("" if d[k] is None else d[k]) for k in fields])
    return buf.getvalue()


def rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def human_table(reports: list[CheckReport]) -> str:
    lines = []
    for r in sorted(reports, key=lambda r: r.name):
        val = r.value if isinstance(r.value, (str, list)) else f"{r.value:.6g}"
        exp = "" if r.expected is None else f"  expected {r.expected}"
        tol = "" if r.tolerance is None else f" +- {r.tolerance:.3g}"
        lines.append(f"{r.status:4s}  {r.name:48s} {val}{exp}{tol}")
    return "\n".join(lines)


def emit(opts, reports: list[CheckReport], table_csv: str | None = None) -> int:
    if not opts["timings"]:
        for r in reports:
            r.runtime_ms = 0
    if opts["json"]:
        Path(opts["json"]).write_text(reports_json(reports))
    csv_text = table_csv if table_csv is not None else reports_csv(reports)
    if opts["csv"]:
        Path(opts["csv"]).write_text(csv_text)
    if not opts["quiet"]:
        if table_csv is not None and not opts["csv"]:
            sys.stdout.write(table_csv)
        print(human_table(reports))
    return EXIT_OK if checks.all_passed(reports) else EXIT_FAIL


# -- commands -----------------------------------------------------------------


def _config(opts) -> RunConfig:
    return RunConfig(suite=opts["suite"], seed=opts["seed"], samples=opts["samples"], workers=opts["workers"], timings=opts["timings"])


def cmd_verify(opts) -> int:
    suite = opts["suite"]
    if suite != "all" and suite not in checks.SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {list(checks.SUITES)} or 'all'")
    reports = checks.run_suites([suite] if suite != "all" else "all", _config(opts))
    return emit(opts, reports)


def cmd_df_sweep(opts) -> int:
    lo, hi, step = float(opts["eta_min"]), float(opts["eta_max"]), float(opts["step"])
    if not (0 < lo <= hi <= 1 and step > 0):
        raise UsageError("need 0 < eta-min <= eta-max <= 1 and step > 0")
    etas = np.round(lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1), 12)
    grid = tube.DFGrid.logspace()
    sweep = tube.df_sweep(etas, grid)
    est = tube.df_exponent_estimate(grid)
    rows = [{"eta": f"{eta:.6g}", "min_eigenvalue": repr(val)} for eta, val in sweep]
    reports = [report(f"df_sweep.eta={eta:.4f}", val, samples=len(grid.deltas) * len(grid.base_points) * grid.n_theta) for eta, val in sweep]
    reports.append(report("df_sweep.exponent_estimate", est, [0.495, 0.505]))
    return emit(opts, reports, rows_csv(rows))


def cmd_ergodic(opts) -> int:
    group = fuchsian.octagon_group()
    if opts["experiment"] == "geodesic":
        T, dt, bins = float(opts["time"]), float(opts["dt"]), int(opts["bins"])
        if not 0 < dt <= 0.5:
            raise UsageError("dt must lie in (0, 0.5]")
        if T / dt < 1e4:
            raise UsageError("time/dt must be at least 1e4")
        s = checks.task_seed(opts["seed"], "ergodic.geodesic")
        try:
            res = ergodic.equidistribution_experiment(group, T, dt, bins, s)
        except ValueError as exc:
            raise UsageError(str(exc))
        reports = [report("ergodic.geodesic_tv", res.tv_distance, 0.0, 0.05, res.steps, s)]
        return emit(opts, reports, res.histogram.to_csv())
    N, L, m = int(opts["words"]), int(opts["length"]), int(opts["grid"])
    if not 1 <= m <= 32 or L < 0:
        raise UsageError("grid must lie in 1..32 and length must be non-negative")
    s = checks.task_seed(opts["seed"], "ergodic.boundary")
    hist = ergodic.boundary_orbit_experiment(group, N, L, m, s)
    reports = [
        report("ergodic.boundary_min_bin_count", int(hist.counts.min()), [1, None], None, N, s),
        report("ergodic.boundary_diagonal_fraction", ergodic.diagonal_fraction(hist, 0), samples=N, seed=s),
    ]
    return emit(opts, reports, hist.to_csv())


def cmd_hardy(opts) -> int:
    group = fuchsian.octagon_group()
    try:
        f = hardy.named_function(opts["f"])
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    which = opts["experiment"]
    if which == "stokes":
        grid = int(opts["stokes_grid"])
        if grid < 4:
            raise UsageError("grid must be at least 4")
        reports = []
        rows = []
        for b, box in enumerate(hardy.DEFAULT_BOXES):
            r = hardy.stokes_balance_box(f, box, grid)
            reports.append(report(f"hardy.stokes.box{b}.three_way_gap", r.max_gap, 0.0, 1e-2, grid**4))
            rows.append({"box": b, "interior_direct": repr(r.interior_direct.real), "interior_d_omega": repr(r.interior_d_omega.real),
                         "boundary": repr(r.boundary.real), "max_gap": repr(r.max_gap)})
        return emit(opts, reports, rows_csv(rows))
    ts = float_list(opts["t"])
    n = int(opts["samples"] or (1_000_000 if which == "level-integral" else 100_000))
    rows, reports = [], []
    for t in ts:
        s = checks.task_seed(opts["seed"], f"hardy.{which}.{f.name}.t={t}")
        try:
            if which == "level-integral":
                est = hardy.level_integral(f, t, n, s, group)
            else:
                est = hardy.gradient_level_integral(f, t, n, s, group)
        except ValueError as exc:
            raise UsageError(str(exc))
        rows.append({"t": repr(t), "estimate": repr(est.value), "stderr": repr(est.stderr)})
        if which == "level-integral" and opts["f"] in ("const", "1"):
            reports.append(report(f"hardy.level_integral_t={t}", est.value, 8 * math.pi**2, 3 * est.stderr, n, s))
        else:
            reports.append(report(f"hardy.{which}_t={t}", est.value, samples=n, seed=s))
    if which == "level-integral":
        bound = 4 * math.pi**2 * f.bound**2 * (2 * group.genus - 2)
        reports.append(report("hardy.prefactor_bound", bound))
    return emit(opts, reports, rows_csv(rows))


def cmd_area(opts) -> int:
    group = fuchsian.octagon_group()
    n = int(opts["samples"] or 10_000_000)
    s = checks.task_seed(opts["seed"], "area")
    est = fuchsian.domain_area(group, n, s)
    reports = [report("area.monte_carlo", est.value, 2 * math.pi, 3 * est.stderr, n, s)]
    rows = [{"estimate": repr(est.value), "stderr": repr(est.stderr), "samples": n, "exact": repr(2 * math.pi)}]
    return emit(opts, reports, rows_csv(rows))


COMMANDS = {"verify": cmd_verify, "df-sweep": cmd_df_sweep, "ergodic": cmd_ergodic, "hardy": cmd_hardy, "area": cmd_area}


def main(argv=None) -> int:
    try:
        opts = resolve(argv)
        return COMMANDS[opts["command"]](opts)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"levitube: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except fuchsian.ReductionStall as exc:
        print(f"levitube: numerical stall: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
