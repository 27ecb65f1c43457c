"""``lcgeom`` command line.

Exit codes: 0 when every check passes (PASS, EQUALITY or SKIPPED), 2 when
any check fails, 1 on configuration or numerical errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .errors import LcGeomError
from .inequality import FAIL
from .scenario import Scenario, run_solver, run_tasks

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return v


def _num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def write_csv(path: Path, header: list[str], rows: list[dict]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)  # RFC 4180: CRLF line ends, minimal quoting
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r.get(k, "")) for k in header])
    return path


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_num) + "\n", encoding="utf-8")
    return path


def _flatten(report: dict, item: str, params: dict) -> list[dict]:
    # child names already carry their parent path
    row = {"item": item, "check": report["name"], "params": params, "verdict": report["verdict"]}
    for k in ("lhs", "rhs", "slack", "tolerance", "eq_tolerance"):
        row[k] = float(report[k])  # "inf" / "nan" strings parse too
    rows = [row]
    for c in report.get("children", []):
        rows.extend(_flatten(c, item, params))
    return rows


CHECK_COLUMNS = ["item", "check", "params", "lhs", "rhs", "slack", "tolerance", "eq_tolerance", "verdict"]


def do_check(sc: Scenario, out: Path, jobs: int) -> tuple[int, list[dict]]:
    results = run_tasks(sc, sc.check_tasks(), jobs)
    rows = []
    failed = False
    for res in results:
        for rep in res["reports"]:
            failed |= rep["verdict"] == FAIL
            rows.extend(_flatten(rep, res["item"], res["params"]))
    write_json(out / "checks.json", {"scenario": sc.name, "seed": sc.seed, "quadrature": sc.quad.to_json(),
                                     "results": results})
    write_csv(out / "checks.csv", CHECK_COLUMNS, rows)
    return (EXIT_FAIL if failed else EXIT_OK), rows


def do_compute(sc: Scenario, out: Path, jobs: int) -> int:
    results = run_tasks(sc, sc.quantity_tasks(), jobs)
    write_json(out / "quantities.json", {"scenario": sc.name, "seed": sc.seed, "results": results})
    write_csv(out / "quantities.csv", ["item", "quantity", "params", "value", "error"], results)
    return EXIT_OK


def do_sweep(sc: Scenario, out: Path, jobs: int) -> dict:
    results = run_tasks(sc, sc.sweep_tasks(), jobs)
    series = {s["id"]: [] for s in sc.sweeps}
    for r in results:
        series[r["sweep"]].append(r)
    for sid, rows in series.items():
        write_csv(out / f"sweep_{sid}.csv", ["parameter", "value", "error_estimate"],
                  [{"parameter": r["parameter"], "value": r["value"], "error_estimate": r["error"]} for r in rows])
    return series


def do_solve(sc: Scenario, out: Path):
    runs, probes = run_solver(sc)
    for rid, res in runs:
        write_json(out / f"solve_{rid}.json", res.to_json())
    if probes:
        write_json(out / "uniqueness.json",
                   {pid: dict(rep.to_json(), run_ids=ids) for pid, ids, rep in probes})
    ok = all(rep.agree for _, _, rep in probes) and all(r.converged for _, r in runs)
    return runs, (EXIT_OK if ok else EXIT_FAIL)


def do_report(sc: Scenario, out: Path, jobs: int) -> int:
    from . import plots

    do_compute(sc, out, jobs)
    code, rows = do_check(sc, out, jobs)
    if rows:
        plots.plot_slacks(rows, out / "checks_slack.png")
    for sid, series in do_sweep(sc, out, jobs).items():
        plots.plot_sweep(sid, series, out / f"sweep_{sid}.png")
    runs, solve_code = do_solve(sc, out)
    for rid, res in runs:
        plots.plot_solve(rid, res, out / f"solve_{rid}.png")
    return max(code, solve_code)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcgeom", description="Evaluate and check log-concave geometry scenarios.")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, help_ in [("compute", "evaluate the listed quantities"),
                        ("check", "run the listed inequality checks"),
                        ("sweep", "evaluate parameter sweeps"),
                        ("solve-ma", "run the Monge-Ampere solver and uniqueness probes"),
                        ("report", "all of the above plus figures")]:
        s = sub.add_parser(verb, help=help_)
        s.add_argument("--config", required=True, help="scenario JSON file")
        s.add_argument("--out-dir", default=".", help="directory for CSV/JSON/PNG output")
        s.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        s.add_argument("--quad", default=None, help="quadrature preset name or JSON object")
        s.add_argument("--jobs", type=int, default=1, help="worker processes")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = Scenario.load(args.config, seed=args.seed, quad=args.quad)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jobs = max(1, args.jobs)
        if args.verb == "compute":
            return do_compute(sc, out, jobs)
        if args.verb == "check":
            return do_check(sc, out, jobs)[0]
        if args.verb == "sweep":
            do_sweep(sc, out, jobs)
            return EXIT_OK
        if args.verb == "solve-ma":
            return do_solve(sc, out)[1]
        return do_report(sc, out, jobs)
    except (LcGeomError, json.JSONDecodeError) as exc:
        print(f"lcgeom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
