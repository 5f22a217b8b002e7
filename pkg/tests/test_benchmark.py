import csv
import io

from cpdmd import benchmark as bench
from cpdmd.detector import HyperParams, single_cp
from cpdmd.selection import select_hyperparams
from cpdmd.synth import generate, lookup


def test_replay_matches_single_runs():
    x = generate(lookup("amplitude/2"), 2)
    sel = select_hyperparams(x[:100]).best
    configs = [(0.05, 4.5), (0.1, 1.5)]
    found = bench.replay_configs(x, sel, 100, configs)
    for lam, L in configs:
        params = HyperParams(100, *sel, lam=lam, L=L)
        assert found[(lam, L)] == single_cp(x, params, keep_trace=False).detection


def test_smoke_run_writes_well_formed_table():
    config = bench.BenchmarkConfig(
        scenarios=("mean/3", "location/1"), seeds=(0,), cpdmd_grid=((0.05, 4.5), (0.05, 2.5)),
        ewma_grid=((0.05, 2.5),), null_runs=1, null_length=400,
    )
    run = bench.run_benchmark(config)
    assert not run.partial and len(run.outcomes) == 3
    rows = bench.summarise(run)
    buf = io.StringIO()
    bench.write_table(rows, buf)
    table = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert list(table[0]) == list(bench.TABLE_HEADER)
    scopes = {r["scope"] for r in table}
    assert {"all", "mean", "location", "mean/3", "location/1"} <= scopes
    default = [r for r in table if r["scope"] == "all" and r["algorithm"] == "CPDMD" and "default" in r["tag"]]
    assert len(default) == 1 and default[0]["params"] == "lambda=0.05;L=4.5"
    assert all(0 <= float(r["F1"]) <= 1 for r in table)


def test_single_config_gives_one_row_per_scope():
    config = bench.BenchmarkConfig(scenarios=("variance/0.4",), seeds=(0, 1), cpdmd_grid=((0.05, 4.5),), ewma_grid=())
    rows = bench.summarise(bench.run_benchmark(config))
    assert [(r.scope, r.tag) for r in rows] == [("all", "default+best"), ("variance", "default+best"),
                                               ("variance/0.4", "default+best")]


def test_budget_overrun_is_partial():
    config = bench.BenchmarkConfig(scenarios=("mean/3",), seeds=(0, 1, 2), cpdmd_grid=((0.05, 4.5),),
                                   ewma_grid=(), budget_seconds=0.0)
    run = bench.run_benchmark(config)
    assert run.partial and len(run.outcomes) < 3


def test_parallel_matches_serial():
    kw = dict(scenarios=("trend/(0,10)",), seeds=(0, 1), cpdmd_grid=((0.05, 4.5),), ewma_grid=((0.05, 2.5),))
    serial = bench.run_benchmark(bench.BenchmarkConfig(**kw))
    parallel = bench.run_benchmark(bench.BenchmarkConfig(jobs=2, **kw))
    assert [o.detections for o in serial.outcomes] == [o.detections for o in parallel.outcomes]
