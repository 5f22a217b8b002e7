"""Seeded simulation study of the detector and the EWMA baseline.

Each sequence is generated from a catalog scenario, hyperparameters are
selected on its burn-in, and the first alarm is recorded for every
``(lambda, L)`` configuration. The error series does not depend on
``(lambda, L)``, so it is computed once and replayed through one chart per
configuration.
"""

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .baseline import EwmaBaselineParams, ewma_detect
from .detector import EwmaMonitor, error_series
from .errors import CpdmdError, NoValidRunsError
from .metrics import MarginSpec, aggregate_prf1, arl0, arl1, run_length
from .selection import GridSpec, select_hyperparams
from .synth import ChangeScenario, generate, lookup, null_scenario, scenario_catalog

log = logging.getLogger(__name__)

LAMBDAS = (0.05, 0.10)
LIMITS = (1.5, 2.5, 3.5, 4.5, 5.5)
CPDMD_DEFAULT = (0.05, 4.5)
EWMA_DEFAULT = (0.05, 2.5)
TABLE_HEADER = ("scope", "algorithm", "params", "tag", "P", "R", "F1",
                "ARL1", "SDRL1", "ARL0", "SDRL0", "n_runs")

Config = Tuple[float, float]


def default_grid() -> List[Config]:
    return [(lam, L) for lam in LAMBDAS for L in LIMITS]


@dataclass(frozen=True)
class BenchmarkConfig:
    scenarios: Tuple[str, ...] = tuple(scenario_catalog())
    seeds: Tuple[int, ...] = tuple(range(100))
    T0: int = 100
    cpdmd_grid: Tuple[Config, ...] = tuple(default_grid())
    ewma_grid: Tuple[Config, ...] = tuple(default_grid())
    spec: GridSpec = GridSpec()
    margins: MarginSpec = MarginSpec()
    null_runs: int = 0
    null_length: int = 100_000
    jobs: int = 1
    budget_seconds: Optional[float] = None


@dataclass
class RunOutcome:
    """First alarms of every configuration on one generated sequence."""

    scenario: str
    kind: str
    seed: int
    tau: Optional[int]
    T: int
    selected: Optional[Tuple[int, int, int]]
    detections: Dict[Tuple[str, float, float], Optional[int]] = field(default_factory=dict)
    error: Optional[str] = None


def replay_configs(x, selected, T0: int, configs: Sequence[Config]) -> Dict[Config, Optional[int]]:
    """First alarm of each ``(lambda, L)`` chart fed the same error series."""
    w, d, r = selected
    monitors = {cfg: EwmaMonitor(T0, cfg[0], cfg[1]) for cfg in configs}
    found: Dict[Config, Optional[int]] = {cfg: None for cfg in configs}
    pending = set(configs)
    for t, eps in error_series(x, w, d, r):
        for cfg in list(pending):
            if monitors[cfg].push(t, eps):
                found[cfg] = t
                pending.discard(cfg)
        if not pending:
            break
    return found


def run_sequence(scenario: ChangeScenario, seed: int, T0: int, cpdmd_grid, ewma_grid, spec: GridSpec) -> RunOutcome:
    x = generate(scenario, seed)
    outcome = RunOutcome(scenario.name, scenario.kind, seed, scenario.tau, scenario.T, None)
    if cpdmd_grid:
        try:
            selection = select_hyperparams(x[:T0], spec)
            outcome.selected = selection.best
            found = replay_configs(x, selection.best, T0, cpdmd_grid)
        except CpdmdError as exc:
            outcome.error = f"{type(exc).__name__}: {exc}"
            found = {cfg: None for cfg in cpdmd_grid}
        for (lam, L), det in found.items():
            outcome.detections[("CPDMD", lam, L)] = det
    for lam, L in ewma_grid:
        try:
            det = ewma_detect(x, EwmaBaselineParams(T0, lam, L))
        except CpdmdError as exc:
            outcome.error = f"{type(exc).__name__}: {exc}"
            det = None
        outcome.detections[("EWMA", lam, L)] = det
    return outcome


def _task(args) -> RunOutcome:
    name, T, seed, T0, cpdmd_grid, ewma_grid, spec = args
    scenario = null_scenario(name.split("/")[0], T) if name.endswith("/null") else lookup(name)
    return run_sequence(scenario, seed, T0, cpdmd_grid, ewma_grid, spec)


def _tasks(config: BenchmarkConfig) -> List[tuple]:
    base = (config.T0, tuple(config.cpdmd_grid), tuple(config.ewma_grid), config.spec)
    tasks = [(name, None, seed) + base for name in config.scenarios for seed in config.seeds]
    kinds = []
    for name in config.scenarios:
        kind = name.split("/")[0]
        if kind not in kinds:
            kinds.append(kind)
    for i in range(config.null_runs):
        kind = kinds[i % len(kinds)]
        tasks.append((f"{kind}/null", config.null_length, i) + base)
    return tasks


@dataclass
class BenchmarkRun:
    outcomes: List[RunOutcome]
    partial: bool = False
    elapsed: float = 0.0


def run_benchmark(config: BenchmarkConfig) -> BenchmarkRun:
    """Run every task; stops early and marks the run partial once the budget is spent."""
    tasks = _tasks(config)
    started = time.monotonic()
    outcomes: List[RunOutcome] = []
    partial = False

    def over_budget() -> bool:
        return config.budget_seconds is not None and time.monotonic() - started > config.budget_seconds

    if config.jobs <= 1:
        for task in tasks:
            if over_budget():
                partial = True
                break
            outcomes.append(_task(task))
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_task, task) for task in tasks]
            for future in as_completed(futures):
                outcomes.append(future.result())
                if over_budget():
                    partial = True
                    for f in futures:
                        f.cancel()
                    break
    if partial:
        log.warning("time budget of %.0f s exhausted after %d of %d sequences",
                    config.budget_seconds, len(outcomes), len(tasks))
    outcomes.sort(key=lambda o: (o.tau is None, o.scenario, o.seed))
    return BenchmarkRun(outcomes, partial, time.monotonic() - started)


@dataclass(frozen=True)
class TableRow:
    scope: str
    algorithm: str
    lam: float
    L: float
    tag: str
    P: float
    R: float
    F1: float
    ARL1: float
    SDRL1: float
    ARL0: float
    SDRL0: float
    n_runs: int

    @property
    def params(self) -> str:
        return f"lambda={self.lam:g};L={self.L:g}"

    def as_csv(self) -> tuple:
        def fmt(v):
            return "" if isinstance(v, float) and math.isnan(v) else f"{v:.6f}"

        return (self.scope, self.algorithm, self.params, self.tag,
                fmt(self.P), fmt(self.R), fmt(self.F1), fmt(self.ARL1), fmt(self.SDRL1),
                fmt(self.ARL0), fmt(self.SDRL0), self.n_runs)


def _scopes(outcomes: Sequence[RunOutcome]) -> List[Tuple[str, List[RunOutcome]]]:
    changed = [o for o in outcomes if o.tau is not None]
    scopes = [("all", changed)]
    for kind in dict.fromkeys(o.kind for o in changed):
        scopes.append((kind, [o for o in changed if o.kind == kind]))
    for name in dict.fromkeys(o.scenario for o in changed):
        scopes.append((name, [o for o in changed if o.scenario == name]))
    return scopes


def summarise(run: BenchmarkRun, margins: MarginSpec = MarginSpec(), T0: int = 100,
              defaults: Dict[str, Config] = None) -> List[TableRow]:
    """Aggregate outcomes into one row per (scope, algorithm, configuration).

    Scopes are all changed sequences, each change type and each scenario.
    Null sequences of the change types in a scope supply its ``ARL0``. Tags mark
    the default configuration and the configuration with the highest F1.
    """
    defaults = defaults or {"CPDMD": CPDMD_DEFAULT, "EWMA": EWMA_DEFAULT}
    nulls = [o for o in run.outcomes if o.tau is None]
    keys = list(dict.fromkeys(k for o in run.outcomes for k in o.detections))
    rows: List[TableRow] = []
    for scope, members in _scopes(run.outcomes):
        if not members:
            continue
        kinds = {o.kind for o in members}
        scope_nulls = [o for o in nulls if o.kind in kinds]
        for algorithm in dict.fromkeys(k[0] for k in keys):
            block = []
            for key in (k for k in keys if k[0] == algorithm):
                dets = [o.detections.get(key) for o in members]
                res = aggregate_prf1(
                    (([o.tau], [] if det is None else [det]) for o, det in zip(members, dets)), margins
                )
                try:
                    a1, s1 = arl1([(o.tau, det) for o, det in zip(members, dets)])
                except NoValidRunsError:
                    a1, s1 = math.nan, math.nan
                if scope_nulls:
                    a0, s0 = arl0([run_length(o.detections.get(key), o.T, T0) for o in scope_nulls])
                else:
                    a0, s0 = math.nan, math.nan
                block.append([scope, algorithm, key[1], key[2], "", res.precision, res.recall,
                              res.f1, a1, s1, a0, s0, len(members)])
            best = max(range(len(block)), key=lambda i: (block[i][7], -i))
            for i, row in enumerate(block):
                tags = []
                if (row[2], row[3]) == defaults.get(algorithm):
                    tags.append("default")
                if i == best:
                    tags.append("best")
                row[4] = "+".join(tags) or "grid"
                rows.append(TableRow(*row))
    return rows


def write_table(rows: Iterable[TableRow], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for row in rows:
        writer.writerow(row.as_csv())


def write_runs(run: BenchmarkRun, fh) -> None:
    """Raw per-sequence detections, one row per (sequence, algorithm, configuration)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(("scenario", "seed", "tau", "T", "w", "d", "r", "algorithm", "lambda", "L", "detection"))
    for o in run.outcomes:
        w, d, r = o.selected or ("", "", "")
        for (algorithm, lam, L), det in o.detections.items():
            writer.writerow((o.scenario, o.seed, "" if o.tau is None else o.tau, o.T, w, d, r,
                             algorithm, f"{lam:g}", f"{L:g}", "" if det is None else det))
