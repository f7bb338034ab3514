import json
import math
import os
import shutil
import statistics
import stat
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sepconf.catalog import SettingLevel, Solver, default_configuration, make_configuration
from sepconf.errors import EmptyList, LaunchError, LogParseError, NoCommonUnsolved, NonPositiveDefaultTime, \
    SolverNotFound
from sepconf.harness import (
    DefaultsCache,
    EvalRecord,
    Evaluator,
    Instance,
    InstanceSet,
    Job,
    RunPlan,
    SolveOutcome,
    SolveStatus,
    StubSolver,
    StubTable,
    SubprocessRunner,
    config_key,
    control_settings,
    evaluate,
    gap_comparison,
    improvement,
    load_stub_table,
    mean_time,
    parse_gurobi_log,
    parse_scip_log,
    run_batch,
    run_solve,
    summarize,
)

LOGS = Path(__file__).parent / "fixtures" / "logs"
FAKE = Path(__file__).parent / "tools" / "fake_solver.py"


def with_levels(cat, **levels):
    return make_configuration(cat, {i: levels.get(i, "default") for i in cat.ids})


def outcome(t, status=SolveStatus.OPTIMAL, seed=0, limit=None, inst="i", cfg="c"):
    return SolveOutcome(inst, cfg, seed, status, t, 0.0, None, limit)


def record(value, censored=False, solved=True, gap=0.0, inst="i"):
    return EvalRecord(inst, 10.0, 10.0, value, censored, solved, gap)


# -- stub solver -------------------------------------------------------------


def test_stub_echoes_table_entry(stub_catalog):
    cfg = with_levels(stub_catalog, gomory="off")
    table = StubTable(times={"inst": {config_key(cfg): 7.25}})
    out = StubSolver(stub_catalog, table).solve("inst", cfg, seed=4)
    assert (out.status, out.time, out.gap, out.seed) == (SolveStatus.OPTIMAL, 7.25, 0.0, 4)
    assert out.config_hash == cfg.digest


def test_stub_time_limit_censors_at_limit(stub_catalog):
    cfg = default_configuration(stub_catalog)
    stub = StubSolver(stub_catalog, StubTable(times={"inst": {"default": 12.0}}))
    out = stub.solve("inst", cfg, 0, time_limit=5.0)
    assert out.status is SolveStatus.TIME_LIMIT and out.time == 5.0 and out.gap > 0


def test_stub_gap_limit(stub_catalog):
    table = StubTable(times={"inst": {"default": 12.0}}, gaps={"inst": [(1.0, 0.30), (3.0, 0.08), (6.0, 0.01)]})
    out = StubSolver(stub_catalog, table).solve("inst", default_configuration(stub_catalog), 0, gap_target=0.10)
    assert out.status is SolveStatus.GAP_LIMIT and out.time == 3.0 and out.gap == 0.08


def test_stub_linear_gap_and_limit_interplay(stub_catalog):
    stub = StubSolver(stub_catalog, StubTable(default_base=10.0, initial_gap=0.5))
    cfg = default_configuration(stub_catalog)
    out = stub.solve("x", cfg, 0, gap_target=0.1)
    assert out.status is SolveStatus.GAP_LIMIT and out.time == pytest.approx(8.0)
    out = stub.solve("x", cfg, 0, time_limit=4.0)
    assert out.status is SolveStatus.TIME_LIMIT and out.gap == pytest.approx(0.3)


def test_stub_effects_planted_and_jitter(stub_catalog):
    table = StubTable(
        default_base=8.0,
        effects={"gomory": {SettingLevel.OFF: 0.5}},
        planted={"clique": SettingLevel.AGGRESSIVE},
        penalty=0.25,
    )
    stub = StubSolver(stub_catalog, table)
    assert stub.scripted_time("a", with_levels(stub_catalog, clique="aggressive"), 0) == 8.0
    assert stub.scripted_time("a", default_configuration(stub_catalog), 0) == 10.0
    assert stub.scripted_time("a", with_levels(stub_catalog, clique="aggressive", gomory="off"), 0) == 5.0
    noisy = StubSolver(stub_catalog, StubTable(jitter=0.1))
    ts = {noisy.scripted_time("a", default_configuration(stub_catalog), s) for s in range(20)}
    assert len(ts) > 1 and all(9.0 <= t <= 11.0 for t in ts)
    assert noisy.scripted_time("a", default_configuration(stub_catalog), 3) == noisy.scripted_time(
        "a", default_configuration(stub_catalog), 3)


def test_stub_usage_respects_off(stub_catalog):
    stub = StubSolver(stub_catalog, StubTable(usage={"*": {"gomory": 5, "clique": 2}}))
    out = stub.solve("a", with_levels(stub_catalog, gomory="off"), 0)
    assert dict(out.cut_stats) == {"gomory": 0, "clique": 2}
    assert stub.calls == 1


def test_stub_table_file_round_trip(tmp_path, stub_catalog):
    table = StubTable(default_base=3.0, base={"a": 2.0}, effects={"mir": {SettingLevel.AGGRESSIVE: 0.8}},
                      planted={"clique": SettingLevel.OFF}, penalty=0.1, gaps={"a": [(1.0, 0.2)]},
                      usage={"a": {"mir": 3}}, fail=frozenset({"z"}))
    path = tmp_path / "t.json"
    path.write_text(json.dumps(table.to_dict()))
    assert load_stub_table(path) == table
    ypath = tmp_path / "t.yaml"
    ypath.write_text("default_base: 4\nbase: {a: 1.5}\n")
    assert load_stub_table(ypath).base == {"a": 1.5}


def test_stub_logs_persisted(tmp_path, stub_catalog):
    stub = StubSolver(stub_catalog, log_dir=tmp_path)
    out = stub.solve("a", default_configuration(stub_catalog), 2)
    assert Path(out.log_path).exists()


def test_run_solve_with_stub(stub_catalog):
    out = run_solve(Instance("a"), default_configuration(stub_catalog), stub_catalog, 0,
                    runner=StubSolver(stub_catalog))
    assert out.time == 10.0


# -- metrics -----------------------------------------------------------------


@pytest.mark.parametrize("times,expected", [([2, 4], 3.0), ([6.5] * 10, 6.5), (list(range(1, 11)), 5.5)])
def test_mean_time_examples(times, expected):
    assert mean_time([outcome(t, seed=i) for i, t in enumerate(times)]) == expected


def test_mean_time_limit_and_errors():
    runs = [outcome(25.0, SolveStatus.TIME_LIMIT, 0, 25.0), outcome(5.0, seed=1),
            SolveOutcome.error("i", "c", 2, "boom")]
    assert mean_time(runs) == 15.0
    with pytest.raises(EmptyList):
        mean_time([])
    with pytest.raises(EmptyList):
        mean_time([SolveOutcome.error("i", "c", 0, "boom")])
    with pytest.raises(ValueError):
        mean_time([outcome(1.0), outcome(1.0, inst="j")])


def test_mean_time_all_censored_is_exact_limit():
    limit = 2.5 * 0.1
    runs = [outcome(limit, SolveStatus.TIME_LIMIT, s, limit) for s in range(10)]
    assert mean_time(runs) == limit


def test_improvement_examples():
    assert improvement(10, 25, 2.5) == (-150.0, True)
    assert improvement(10, 5, 2.5) == (50.0, False)
    assert improvement(7.3, 7.3, 2.5) == (0.0, False)
    with pytest.raises(NonPositiveDefaultTime):
        improvement(0, 1, 2.5)
    with pytest.raises(ValueError):
        improvement(10, 26, 2.5)


@given(st.floats(0.01, 1e4), st.floats(1.1, 5.0), st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_improvement_monotone_and_bounded(t_default, mult, a, b):
    lo, hi = sorted((a, b))
    limit = mult * t_default
    v_lo, _ = improvement(t_default, lo * limit, mult)
    v_hi, _ = improvement(t_default, hi * limit, mult)
    if hi - lo > 1e-9:
        assert v_lo > v_hi
    for v in (v_lo, v_hi):
        assert 100 * (1 - mult) <= v < 100
    assert improvement(t_default, limit, mult) == (100 * (1 - mult), True)


@given(st.floats(0.01, 1e4), st.floats(0.0001, 0.9999))
def test_censoring_never_flips_sign(t_default, frac):
    # a faster configuration finishes before any limit > t_default could fire
    t_config = frac * t_default
    assert t_config < 2.5 * t_default
    value, censored = improvement(t_default, t_config, 2.5)
    assert value > 0 and not censored


def test_summarize_examples():
    s = summarize([record(v) for v in [1, 2, 3, 4, 5]])
    # oracle: statistics' "inclusive" quartiles are the same linear rule, computed independently
    q1, _, q3 = statistics.quantiles([1, 2, 3, 4, 5], n=4, method="inclusive")
    assert (s.median, s.iqr) == (3.0, q3 - q1) == (3.0, 2.0)
    assert (summarize([record(7)]).median, summarize([record(7)]).iqr) == (7.0, 0.0)
    assert summarize([record(-150, True), record(0), record(50)]).median == 0.0
    with pytest.raises(EmptyList):
        summarize([])


def test_summarize_counts_and_errors():
    recs = [record(-150, censored=True, solved=False), record(10), record(20),
            EvalRecord("e", 1.0, math.nan, math.nan, False, False, n_errors=2, error="x")]
    s = summarize(recs)
    assert (s.n, s.n_solved, s.n_censored, s.n_errors) == (3, 2, 1, 1)
    assert s.median == 10.0
    assert s.cell() == "10.00 (85.00)"


@given(st.lists(st.floats(-150, 100), min_size=2, max_size=40))
def test_iqr_matches_inclusive_quartiles(values):
    s = summarize([record(v) for v in values])
    q1, _, q3 = statistics.quantiles(values, n=4, method="inclusive")
    assert s.iqr == pytest.approx(q3 - q1, abs=1e-9)


@given(st.lists(st.floats(-150, 100), min_size=1, max_size=41), st.data())
def test_median_insensitive_to_censoring_below(values, data):
    med = summarize([record(v) for v in values]).median
    order = sorted(range(len(values)), key=lambda i: values[i])
    # order statistics strictly below those that form the median
    below = order[: (len(values) - 1) // 2]
    chosen = data.draw(st.lists(st.sampled_from(below), unique=True) if below else st.just([]))
    censored = [(-150.0 if i in chosen else v) for i, v in enumerate(values)]
    assert summarize([record(v) for v in censored]).median == med


def test_gap_comparison_examples():
    def pair(a, b, n):
        return (record(0, solved=False, gap=a, inst=n), record(0, solved=False, gap=b, inst=n))

    same = [pair(0.05, 0.05, "x")]
    assert gap_comparison([p[0] for p in same], [p[1] for p in same]) == 0.0
    two = [pair(0.10, 0.09, "x"), pair(0.08, 0.08, "y")]
    assert gap_comparison([p[0] for p in two], [p[1] for p in two]) == pytest.approx(0.5)
    one = [pair(0.05, 0.07, "x")]
    assert gap_comparison([one[0][0]], [one[0][1]]) == pytest.approx(-2.0)
    with pytest.raises(NoCommonUnsolved):
        gap_comparison([record(0, solved=True, inst="x")], [record(0, solved=False, inst="x")])


# -- evaluation --------------------------------------------------------------


@pytest.fixture
def stub_setup(stub_catalog):
    def make(table=None, seeds=3, **plan_kw):
        stub = StubSolver(stub_catalog, table or StubTable())
        plan = RunPlan(Solver.STUB, stub_catalog.content_hash, seeds=seeds, **plan_kw)
        return stub, plan

    return make


def test_evaluate_halving(stub_setup, stub_catalog):
    stub, plan = stub_setup(StubTable(effects={"gomory": {SettingLevel.OFF: 0.5}}))
    insts = InstanceSet.of_ids("fam", ["a", "b", "c"])
    recs = evaluate(with_levels(stub_catalog, gomory="off"), insts, plan, runner=stub, catalog=stub_catalog)
    assert [r.improvement for r in recs] == [50.0, 50.0, 50.0]
    assert [r.instance for r in recs] == ["a", "b", "c"]


def test_evaluate_one_censored(stub_setup, stub_catalog):
    cfg = with_levels(stub_catalog, mir="off")
    table = StubTable(times={"b": {config_key(cfg): 40.0}}, effects={"mir": {SettingLevel.OFF: 0.8}})
    stub, plan = stub_setup(table)
    recs = evaluate(cfg, InstanceSet.of_ids("fam", ["a", "b", "c"]), plan, runner=stub, catalog=stub_catalog)
    assert [r.improvement for r in recs] == [pytest.approx(20.0), -150.0, pytest.approx(20.0)]
    assert [r.censored for r in recs] == [False, True, False]
    assert recs[1].t_config == 25.0 and not recs[1].solved


def test_evaluate_default_is_zero(stub_setup, stub_catalog):
    stub, plan = stub_setup(StubTable(jitter=0.2, base={"a": 3.0}))
    recs = evaluate(default_configuration(stub_catalog), InstanceSet.of_ids("f", ["a", "b"]), plan,
                    runner=stub, catalog=stub_catalog)
    assert [r.improvement for r in recs] == [0.0, 0.0]


def test_evaluate_errors_are_per_instance(stub_setup, stub_catalog):
    stub, plan = stub_setup(StubTable(fail=frozenset({"b"})))
    recs = evaluate(with_levels(stub_catalog, clique="off"), InstanceSet.of_ids("f", ["a", "b"]), plan,
                    runner=stub, catalog=stub_catalog)
    assert recs[0].ok and not recs[1].ok and "default runs failed" in recs[1].error
    assert summarize(recs).n_errors == 1


def test_defaults_cached_and_counted(stub_setup, stub_catalog, tmp_path):
    stub, plan = stub_setup(seeds=4)
    cache = DefaultsCache(tmp_path / "defaults.json")
    ev = Evaluator(stub, stub_catalog, plan, cache)
    insts = InstanceSet.of_ids("f", ["a", "b", "c"])
    ev.evaluate(with_levels(stub_catalog, clique="off"), insts)
    ev.evaluate(with_levels(stub_catalog, mir="off"), insts)
    assert (ev.default_solves, ev.config_solves, stub.calls) == (12, 24, 36)
    again = Evaluator(stub, stub_catalog, plan, DefaultsCache(tmp_path / "defaults.json"))
    again.evaluate(default_configuration(stub_catalog), insts)
    assert again.default_solves == 0
    other_seeds = Evaluator(stub, stub_catalog, plan.with_(seeds=2), cache)
    other_seeds.defaults(insts)
    assert other_seeds.default_solves == 6


def test_evaluate_many_keeps_duplicates_apart(stub_setup, stub_catalog):
    stub, plan = stub_setup(seeds=2)
    cfg = with_levels(stub_catalog, clique="off")
    ev = Evaluator(stub, stub_catalog, plan)
    out = ev.evaluate_many([cfg, cfg, default_configuration(stub_catalog)], InstanceSet.of_ids("f", ["a"]))
    assert [len(r) for r in out] == [1, 1, 1]
    assert [r[0].n_runs for r in out] == [2, 2, 2]
    assert ev.config_solves == 6


def test_evaluate_deterministic_with_workers(stub_setup, stub_catalog):
    table = StubTable(jitter=0.3, effects={"zerohalf": {SettingLevel.AGGRESSIVE: 0.7}})
    cfg = with_levels(stub_catalog, zerohalf="aggressive")
    insts = InstanceSet.of_ids("f", [f"i{k}" for k in range(8)])
    stub1, plan1 = stub_setup(table, seeds=5, workers=1)
    stub2, plan2 = stub_setup(table, seeds=5, workers=6)
    r1 = evaluate(cfg, insts, plan1, runner=stub1, catalog=stub_catalog)
    r2 = evaluate(cfg, insts, plan2, runner=stub2, catalog=stub_catalog)
    assert r1 == r2


def test_run_batch_aligned(stub_catalog):
    stub = StubSolver(stub_catalog, StubTable(base={f"i{k}": float(k + 1) for k in range(20)}))
    cfg = default_configuration(stub_catalog)
    jobs = [Job(Instance(f"i{k}"), cfg, 0, None, 0.0) for k in range(20)]
    out = run_batch(stub, jobs, workers=5)
    assert [o.time for o in out] == [float(k + 1) for k in range(20)]


def test_plan_validation_and_budget(stub_catalog):
    h = stub_catalog.content_hash
    with pytest.raises(ValueError):
        RunPlan(Solver.STUB, h, seeds=0)
    with pytest.raises(ValueError):
        RunPlan(Solver.STUB, h, limit_multiplier=1.0)
    plan = RunPlan(Solver.SCIP, h, workers=8, threads=4, thread_budget=16)
    assert plan.effective_workers == 4
    assert RunPlan.from_dict(plan.to_dict()) == plan


# -- log grammars ------------------------------------------------------------


def test_parse_scip_optimal():
    p = parse_scip_log((LOGS / "scip_optimal.log").read_text())
    assert (p.status, p.time, p.gap) == (SolveStatus.OPTIMAL, 3.41, 0.0)
    assert p.cut_stats == {"aggregation": 0, "clique": 18, "gomory": 7, "impliedbounds": 0, "zerohalf": 50}


def test_parse_scip_time_limit():
    p = parse_scip_log((LOGS / "scip_timelimit.log").read_text())
    assert (p.status, p.time) == (SolveStatus.TIME_LIMIT, 25.01)
    assert p.gap == pytest.approx(0.0719)
    assert p.cut_stats == {"clique": 90, "gomory": 50}


def test_parse_scip_other_status_is_error():
    p = parse_scip_log((LOGS / "scip_infeasible.log").read_text())
    assert p.status is SolveStatus.ERROR and "infeasible" in p.message
    with pytest.raises(LogParseError):
        parse_scip_log("nothing useful here\n")


def test_parse_gurobi_logs():
    p = parse_gurobi_log((LOGS / "gurobi_optimal.log").read_text())
    assert (p.status, p.time, p.gap) == (SolveStatus.OPTIMAL, 0.87, 0.0)
    assert p.cut_stats == {"Gomory": 7, "Clique": 18, "Zero half": 50, "Implied bound": 3}
    p = parse_gurobi_log((LOGS / "gurobi_gaplimit.log").read_text(), gap_target=0.1)
    assert p.status is SolveStatus.GAP_LIMIT and p.time == 3.10 and p.gap == pytest.approx(0.074246)
    p = parse_gurobi_log((LOGS / "gurobi_worklimit.log").read_text())
    assert (p.status, p.time) == (SolveStatus.TIME_LIMIT, 25.0)
    p = parse_gurobi_log((LOGS / "gurobi_noincumbent.log").read_text())
    assert p.status is SolveStatus.TIME_LIMIT and math.isinf(p.gap)
    with pytest.raises(LogParseError):
        parse_gurobi_log("Gurobi Optimizer version 13.0.0\n")


def test_control_settings():
    assert control_settings(Solver.SCIP, 3, 25.0, 0.1, 4) == [
        "randomization/randomseedshift = 3",
        "limits/time = 25.0",
        "limits/gap = 0.1",
        "lp/threads = 4",
        "parallel/maxnthreads = 4",
    ]
    assert control_settings(Solver.GUROBI, 1, None, 0.0, 2) == ["Seed 1", "Threads 2"]


# -- subprocess runner with a fake executable --------------------------------


@pytest.fixture
def fake_bin(tmp_path, monkeypatch):
    def install(name):
        target = tmp_path / "bin" / name
        target.parent.mkdir(exist_ok=True)
        shutil.copy(FAKE, target)
        target.chmod(target.stat().st_mode | stat.S_IEXEC)
        return str(target)

    monkeypatch.setenv("FAKE_SOLVER_ARGV", str(tmp_path / "argv.jsonl"))
    return install


@pytest.fixture
def mps_file(tmp_path):
    p = tmp_path / "inst" / "toy.mps"
    p.parent.mkdir()
    p.write_text("NAME toy\nROWS\n N obj\nCOLUMNS\nRHS\nENDATA\n")
    return p


def test_scip_runner_end_to_end(fake_bin, mps_file, tmp_path, scip_catalog, monkeypatch):
    runner = SubprocessRunner(scip_catalog, fake_bin("scip"), log_dir=tmp_path / "logs")
    cfg = with_levels(scip_catalog, gomory="off")
    monkeypatch.setenv("FAKE_SOLVER_TIMES", json.dumps({"toy": 3.5}))
    out = runner.solve(Instance("toy", mps_file), cfg, seed=7)
    assert (out.status, out.time, out.cut_stats["gomory"]) == (SolveStatus.OPTIMAL, 3.5, 0)
    log_text = Path(out.log_path).read_text()
    assert "seed shift 7" in log_text
    settings = Path(out.log_path).with_suffix(".set").read_text()
    assert "separating/gomory/freq = -1" in settings and "limits/time" not in settings
    out = runner.solve(Instance("toy", mps_file), cfg, seed=1, time_limit=2.0)
    assert out.status is SolveStatus.TIME_LIMIT and out.time == 2.0
    argv = [json.loads(line) for line in (tmp_path / "argv.jsonl").read_text().splitlines()]
    assert argv[0][1] == "-s" and argv[0][3] == "-c" and str(mps_file) in argv[0][4]


def test_gurobi_runner_uses_work_limit(fake_bin, mps_file, tmp_path, gurobi_catalog, monkeypatch):
    runner = SubprocessRunner(gurobi_catalog, fake_bin("gurobi_cl"), log_dir=tmp_path / "logs")
    monkeypatch.setenv("FAKE_SOLVER_TIMES", json.dumps({"toy": 9.0}))
    cfg = with_levels(gurobi_catalog, gomory="off")
    out = runner.solve(Instance("toy", mps_file), cfg, seed=2, time_limit=4.0)
    assert (out.status, out.time) == (SolveStatus.TIME_LIMIT, 4.0)
    argv = json.loads((tmp_path / "argv.jsonl").read_text().splitlines()[0])
    assert "WorkLimit=4.0" in argv and "Seed=2" in argv and "GomoryPasses=0" in argv
    assert argv[-1] == str(mps_file)
    assert out.cut_stats == {"Gomory": 0}


def test_runner_unparseable_log_is_error_outcome(fake_bin, mps_file, tmp_path, scip_catalog, monkeypatch):
    runner = SubprocessRunner(scip_catalog, fake_bin("scip"), log_dir=tmp_path / "logs")
    monkeypatch.setenv("FAKE_SOLVER_MODE", "garbage")
    out = runner.solve(Instance("toy", mps_file), default_configuration(scip_catalog), 0)
    assert out.status is SolveStatus.ERROR and "exit code 139" in out.message
    assert "segmentation fault" in Path(out.log_path).read_text()


def test_runner_errors(tmp_path, scip_catalog, stub_catalog, monkeypatch):
    monkeypatch.setenv("SEPCONF_SCIP_BIN", str(tmp_path / "missing-scip"))
    with pytest.raises(SolverNotFound):
        SubprocessRunner(scip_catalog)
    with pytest.raises(ValueError):
        SubprocessRunner(stub_catalog)


def test_runner_requires_instance_file(fake_bin, scip_catalog, tmp_path):
    runner = SubprocessRunner(scip_catalog, fake_bin("scip"), log_dir=tmp_path)
    with pytest.raises(LaunchError):
        runner.solve(Instance("ghost"), default_configuration(scip_catalog), 0)


def test_evaluate_over_fake_scip(fake_bin, tmp_path, scip_catalog, monkeypatch):
    d = tmp_path / "fam"
    d.mkdir()
    for n in ("a", "b"):
        (d / f"{n}.mps").write_text(f"NAME {n}\nROWS\n N obj\nCOLUMNS\nRHS\nENDATA\n")
    monkeypatch.setenv("FAKE_SOLVER_TIMES", json.dumps({"a": 4.0, "b": 2.0}))
    runner = SubprocessRunner(scip_catalog, fake_bin("scip"), log_dir=tmp_path / "logs", pin_cpus=True,
                              threads=1)
    plan = RunPlan(Solver.SCIP, scip_catalog.content_hash, seeds=2, threads=1, workers=2)
    recs = evaluate(default_configuration(scip_catalog), InstanceSet.from_dir(d), plan, runner=runner,
                    catalog=scip_catalog)
    assert [(r.instance, r.t_default, r.improvement) for r in recs] == [("a", 4.0, 0.0), ("b", 2.0, 0.0)]
    assert os.path.isdir(tmp_path / "logs")
