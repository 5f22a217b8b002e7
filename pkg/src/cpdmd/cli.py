"""Command-line interface: ``detect``, ``simulate``, ``evaluate``, ``benchmark``, ``theory-check``.

Exit status is 0 on success, 1 for usage errors, 2 for data errors and 3
for numerical failures; failures also print a one-line JSON object on
stderr.
"""

import argparse
import csv
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from . import benchmark as bench
from . import theory
from .errors import CpdmdError, DataError, NonFiniteError
from .metrics import MarginSpec, aggregate_prf1, arl0, arl1, covering, prf1, run_length
from .pipeline import detect_all
from .selection import GridSpec
from .synth import CHANGE_TYPES, generate, lookup, null_scenario, scenario_catalog

log = logging.getLogger("cpdmd")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("CPDMD_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CPDMD_SEED must be an integer, got {raw!r}")


# ---------------------------------------------------------------- I/O helpers

def read_stream_csv(path) -> np.ndarray:
    """Read a headed numeric CSV into a ``(T, p)`` array; errors name the offending line."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or all(not cell.strip() for cell in header):
            raise DataError(f"{path}: line 1: empty file or missing header row")
        p = len(header)
        rows = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != p:
                raise DataError(f"{path}: line {line}: expected {p} fields, found {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise DataError(f"{path}: line {line}: non-numeric value in {row!r}") from None
    if not rows:
        raise DataError(f"{path}: no observations after the header")
    data = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0])
        raise NonFiniteError(f"{path}: non-finite value in observation {bad + 1}")
    return data


def write_stream_csv(path, x: np.ndarray, with_time: bool = False) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t", "x") if with_time else ("x",))
        for i, value in enumerate(x, start=1):
            writer.writerow((i, repr(float(value))) if with_time else (repr(float(value)),))


def _open_output(path: Optional[str]):
    if path is None or path == "-":
        return _Borrowed(sys.stdout)
    return open(path, "w", newline="", encoding="utf-8")


class _Borrowed:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        self.fh.flush()
        return False


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# ------------------------------------------------------------------ commands

def cmd_detect(args) -> int:
    x = read_stream_csv(args.input)
    spec = GridSpec.parse(args.grid) if args.grid else GridSpec()
    report = detect_all(x, T0=args.burn_in, lam=args.lam, L=args.limit, spec=spec,
                        keep_traces=args.diagnostics is not None)
    for message in report.warnings:
        print(json.dumps({"warning": message}), file=sys.stderr)
    extra = {"sequence": Path(args.input).stem, "T": int(x.shape[0]), "p": int(x.shape[1])}
    with _open_output(args.output) as fh:
        if args.format == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("changepoint",))
            for cp in report.changepoints:
                writer.writerow((cp,))
        else:
            payload = report.to_dict()
            payload.update(extra)
            fh.write(_dump_json(payload))
    if args.diagnostics is not None:
        with open(args.diagnostics, "w", newline="", encoding="utf-8") as fh:
            report.write_traces(fh)
    return EXIT_OK


def _sequence_id(scenario_name: str, seed: int) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-." else "_" for ch in scenario_name.replace("π", "pi"))
    return f"{safe}_seed{seed}"


def cmd_simulate(args) -> int:
    if args.null:
        kind = (args.scenario or "").split("/")[0]
        scenario = null_scenario(kind, args.length or 100_000)
    else:
        if not args.scenario:
            raise UsageError("simulate needs --scenario (or --null with a change type)")
        scenario = lookup(args.scenario, args.length)
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    base = args.seed if args.seed is not None else _default_seed()
    sequences = []
    for seed in range(base, base + args.seeds):
        seq_id = _sequence_id(scenario.name, seed)
        write_stream_csv(out / f"{seq_id}.csv", generate(scenario, seed), with_time=args.with_time)
        sequences.append({"id": seq_id, "file": f"{seq_id}.csv", "seed": seed})
    manifest = scenario.to_dict()
    manifest["sequences"] = sequences
    manifest["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    (out / "manifest.json").write_text(_dump_json(manifest), encoding="utf-8")
    log.info("wrote %d sequences to %s", len(sequences), out)
    return EXIT_OK


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _evaluate_inline(args, margins: MarginSpec) -> dict:
    if args.length is None:
        raise UsageError("--truth/--detections need --length")
    truth = sorted(args.truth or [])
    detections = sorted(args.detections or [])
    res = prf1(truth, detections, margins)
    return {"P": res.precision, "R": res.recall, "F1": res.f1,
            "covering": covering(truth, detections, args.length)}


def _evaluate_batch(args, margins: MarginSpec) -> dict:
    manifest = _load_json(args.input)
    reports = {}
    for path in args.reports:
        if Path(path).resolve() == Path(args.input).resolve():
            continue
        report = _load_json(path)
        key = report.get("sequence", Path(path).stem)
        reports[key] = report
    expected = {seq["id"] for seq in manifest.get("sequences", [])}
    if set(reports) != expected:
        missing = sorted(expected - set(reports))
        unknown = sorted(set(reports) - expected)
        raise DataError(f"sequence IDs do not match the manifest; missing {missing}, unknown {unknown}")
    tau, T = manifest.get("tau"), int(manifest["T"])
    truth = [] if tau is None else [int(tau)]
    ordered = [reports[seq["id"]] for seq in manifest["sequences"]]
    dets = [sorted(int(c) for c in r.get("changepoints", [])) for r in ordered]
    summary = {"n_runs": len(ordered)}
    if tau is None:
        mean, sd = arl0([run_length(d[0] if d else None, T, args.burn_in) for d in dets])
        summary.update({"ARL0": mean, "SDRL0": sd})
        return summary
    res = aggregate_prf1(((truth, d) for d in dets), margins)
    summary.update({"P": res.precision, "R": res.recall, "F1": res.f1,
                    "covering": float(np.mean([covering(truth, d, T) for d in dets]))})
    try:
        mean, sd = arl1([(tau, d[0] if d else None) for d in dets])
        summary.update({"ARL1": mean, "SDRL1": sd})
    except DataError:
        summary.update({"ARL1": None, "SDRL1": None})
    return summary


def cmd_evaluate(args) -> int:
    margins = MarginSpec.parse(args.margins)
    if args.input:
        if not args.reports:
            raise UsageError("--input manifest needs one or more --reports")
        summary = _evaluate_batch(args, margins)
    elif args.truth is not None or args.detections is not None:
        summary = _evaluate_inline(args, margins)
    else:
        raise UsageError("evaluate needs --input with --reports, or --truth/--detections")
    with _open_output(args.output) as fh:
        if args.format == "json":
            fh.write(_dump_json(summary))
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("metric", "value"))
            for key, value in summary.items():
                writer.writerow((key, "" if value is None else (f"{value:.3f}" if isinstance(value, float) else value)))
            if "ARL0" in summary:
                fh.write(f"# ARL0 {summary['ARL0']:.2f} ({summary['SDRL0']:.2f})\n")
    return EXIT_OK


def _expand_scenarios(names: Optional[Sequence[str]]) -> List[str]:
    catalog = scenario_catalog()
    if not names:
        return list(catalog)
    out = []
    for name in names:
        if name in CHANGE_TYPES:
            out.extend(k for k, s in catalog.items() if s.kind == name)
        else:
            out.append(lookup(name).name)
    return list(dict.fromkeys(out))


def cmd_benchmark(args) -> int:
    base = args.seed if args.seed is not None else _default_seed()
    cpdmd_grid = [(lam, L) for lam in (args.lam or bench.LAMBDAS) for L in (args.limit or bench.LIMITS)]
    ewma_grid = [] if args.no_baseline else [(lam, L) for lam in (args.lam or bench.LAMBDAS)
                                              for L in (args.limit or bench.LIMITS)]
    margins = MarginSpec.parse(args.margins)
    config = bench.BenchmarkConfig(
        scenarios=tuple(_expand_scenarios(args.scenario)),
        seeds=tuple(range(base, base + args.seeds)),
        T0=args.burn_in,
        cpdmd_grid=tuple(cpdmd_grid),
        ewma_grid=tuple(ewma_grid),
        spec=GridSpec.parse(args.grid) if args.grid else GridSpec(),
        margins=margins,
        null_runs=args.null_runs,
        null_length=args.length or 100_000,
        jobs=args.jobs,
        budget_seconds=args.budget,
    )
    defaults = {"CPDMD": (0.05, 4.5), "EWMA": (0.05, 2.5)}
    run = bench.run_benchmark(config)
    rows = bench.summarise(run, margins, config.T0, defaults)
    with _open_output(args.output) as fh:
        if args.format == "json":
            fh.write(_dump_json([dict(zip(bench.TABLE_HEADER, row.as_csv())) for row in rows]))
        else:
            bench.write_table(rows, fh)
    if args.runs:
        with open(args.runs, "w", newline="", encoding="utf-8") as fh:
            bench.write_runs(run, fh)
    if run.partial:
        print(json.dumps({"warning": "time budget exhausted; partial results written",
                          "completed": len(run.outcomes)}), file=sys.stderr)
    return EXIT_OK


def cmd_theory_check(args) -> int:
    base = args.seed if args.seed is not None else _default_seed()
    w, d = args.window, args.order
    start = w
    length = args.length or start + args.steps + 1
    stream = generate(null_scenario("periodicity", length), base)
    times = range(start, min(start + args.steps, length - 1) + 1)
    suite = theory.bauer_fike_suite(stream, w, d, times)
    mismatch = max(theory.perturbation_matrix(stream, t, w, d).mismatch for t in times)
    timings = theory.complexity_bench([1], args.sweep, None, steps=args.timing_steps, seed=base)
    rho = spearmanr([r.seconds_per_step for r in timings], [r.theoretical_cost for r in timings])[0]

    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bauer_fike.csv", "w", newline="", encoding="utf-8") as fh:
        suite.write_csv(fh)
    with open(out / "complexity.csv", "w", newline="", encoding="utf-8") as fh:
        theory.write_timings(timings, fh)
    summary = {
        "windows": len(suite.records),
        "violations": suite.violations,
        "skipped": len(suite.skipped),
        "closed_form_max_mismatch": mismatch,
        "timing_cost_spearman": float(rho),
    }
    sys.stdout.write(_dump_json(summary))
    return EXIT_NUMERICAL if suite.violations else EXIT_OK


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpdmd", description="Streaming changepoint detection with windowed Hankel DMD.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--burn-in", type=int, default=100, help="burn-in length T0")
        p.add_argument("--grid", help="grid override, e.g. 'w=0.4,0.6;d=0.1,0.2;m=2'")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--output", help="output path (default: stdout)")

    p = sub.add_parser("detect", help="detect changepoints in a CSV stream")
    p.add_argument("--input", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.05)
    p.add_argument("--limit", type=float, default=4.5)
    p.add_argument("--diagnostics", help="write the per-step chart trace to this CSV")
    common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="write seeded synthetic streams and a manifest")
    p.add_argument("--scenario", help="catalog name such as 'mean/3', or a change type with --null")
    p.add_argument("--null", action="store_true", help="generate change-free streams")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--seed", type=int, help="first seed (default: $CPDMD_SEED or 0)")
    p.add_argument("--length", type=int)
    p.add_argument("--with-time", action="store_true", help="add a 't' column")
    p.add_argument("--output", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score detection reports against a manifest")
    p.add_argument("--input", help="manifest JSON written by simulate")
    p.add_argument("--reports", nargs="+", help="detection report JSON files")
    p.add_argument("--truth", type=int, nargs="*")
    p.add_argument("--detections", type=int, nargs="*")
    p.add_argument("--length", type=int)
    p.add_argument("--margins", default="0,30")
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="simulation study over the scenario catalog")
    p.add_argument("--scenario", nargs="+", help="scenario names or change types (default: all)")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--lambda", dest="lam", type=float, nargs="+")
    p.add_argument("--limit", type=float, nargs="+")
    p.add_argument("--margins", default="0,30")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--null-runs", type=int, default=0)
    p.add_argument("--length", type=int, help="length of null streams")
    p.add_argument("--budget", type=float, help="wall-clock budget in seconds")
    p.add_argument("--runs", help="also write per-sequence detections to this CSV")
    p.add_argument("--no-baseline", action="store_true")
    common(p)
    p.set_defaults(func=cmd_benchmark, format="csv")

    p = sub.add_parser("theory-check", help="eigenvalue perturbation bounds and cost scaling")
    p.add_argument("--seed", type=int)
    p.add_argument("--window", type=int, default=40)
    p.add_argument("--order", type=int, default=10)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--length", type=int)
    p.add_argument("--sweep", type=int, nargs="+", default=list(range(60, 601, 60)))
    p.add_argument("--timing-steps", type=int, default=10)
    p.add_argument("--output", help="output directory")
    p.set_defaults(func=cmd_theory_check)
    return parser


def _fail(exc: BaseException, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload, ensure_ascii=False), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(exc, EXIT_USAGE)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(exc, EXIT_USAGE)
    except CpdmdError as exc:
        return _fail(exc, exc.exit_code)
    except OSError as exc:
        return _fail(exc, EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
