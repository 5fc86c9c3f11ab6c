import json

import pytest

from convrec.evalkit import (
    RunConfig,
    SystemMode,
    read_records_jsonl,
    record_from_dict,
    record_to_dict,
    run_benchmark,
)
from convrec.gateway import Gateway, ScriptedBackend

from helpers import TurnPlan, fallback_titles, make_sample, session_script


def small_fixture(n=6):
    """n samples: even ids succeed at turn 2, odd ids fail with the target at rank 3."""
    samples, script = [], {}
    for i in range(n):
        sample = make_sample(f"s{i:03d}", target_title=f"Golden Reel {i}")
        if i % 2 == 0:
            plans = [TurnPlan(act="ask"), TurnPlan(act="recommend", rec_title=sample.target.title)]
            script.update(session_script(sample, plans))
        else:
            plans = [TurnPlan(act="ask") for _ in range(5)]
            fallback = fallback_titles(sample.sample_id, sample.target.title, target_rank=3)
            script.update(session_script(sample, plans, fallback=fallback))
        samples.append(sample)
    return samples, script


def test_run_benchmark_writes_outputs(tmp_path):
    samples, script = small_fixture()
    report = run_benchmark(samples, RunConfig(), Gateway(ScriptedBackend(script)), out_dir=tmp_path)
    assert (tmp_path / "records.jsonl").exists()
    assert (tmp_path / "metrics.json").exists()
    assert (tmp_path / "report.txt").exists()
    lines = (tmp_path / "records.jsonl").read_text().strip().splitlines()
    assert len(lines) == 6
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["n"] == 6
    assert metrics["success_rate"] == pytest.approx(0.5)
    assert metrics["hit_ratio"]["5"] == pytest.approx(1.0)
    assert "Success Rate" in report.report_text
    assert report.aborted == 0


def test_single_sample_run(tmp_path):
    samples, script = small_fixture(1)
    report = run_benchmark(samples, RunConfig(), Gateway(ScriptedBackend(script)), out_dir=tmp_path)
    assert len(report.records) == 1
    assert (tmp_path / "records.jsonl").read_text().count("\n") == 1


def test_concurrency_one_and_eight_byte_identical(tmp_path):
    samples, script = small_fixture(8)
    out1, out8 = tmp_path / "c1", tmp_path / "c8"
    run_benchmark(samples, RunConfig(concurrency=1), Gateway(ScriptedBackend(script)), out_dir=out1)
    run_benchmark(samples, RunConfig(concurrency=8), Gateway(ScriptedBackend(script)), out_dir=out8)
    for name in ("records.jsonl", "metrics.json", "report.txt"):
        assert (out1 / name).read_bytes() == (out8 / name).read_bytes(), name


def test_rerun_is_byte_identical(tmp_path):
    samples, script = small_fixture()
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_benchmark(samples, RunConfig(), Gateway(ScriptedBackend(script)), out_dir=out_a)
    run_benchmark(samples, RunConfig(), Gateway(ScriptedBackend(script)), out_dir=out_b)
    assert (out_a / "records.jsonl").read_bytes() == (out_b / "records.jsonl").read_bytes()


def test_aborted_sessions_counted_not_measured(tmp_path):
    samples, script = small_fixture(4)
    del script[("planner", "s001", 3)]  # break one session mid-run
    report = run_benchmark(samples, RunConfig(), Gateway(ScriptedBackend(script)), out_dir=tmp_path)
    assert report.aborted == 1
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["aborted"] == 1
    assert metrics["n"] == 3  # aborted samples leave the denominators


def test_records_roundtrip_through_jsonl(tmp_path):
    samples, script = small_fixture()
    report = run_benchmark(samples, RunConfig(), Gateway(ScriptedBackend(script)), out_dir=tmp_path)
    loaded = read_records_jsonl(tmp_path / "records.jsonl")
    assert [record_to_dict(r) for r in loaded] == [record_to_dict(r) for r in report.records]
    one = report.records[0]
    assert record_from_dict(record_to_dict(one)) == one


def test_mode_recorded_in_records(tmp_path):
    sample = make_sample()
    plans = [TurnPlan(act="ask"), TurnPlan(act="recommend", rec_title=sample.target.title)]
    script = session_script(sample, plans, mode="single_agent")
    config = RunConfig(mode=SystemMode.SINGLE_AGENT)
    report = run_benchmark([sample], config, Gateway(ScriptedBackend(script)))
    assert report.records[0].mode == "single_agent"
    assert report.records[0].config_id == "single_agent"
