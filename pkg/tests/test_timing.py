from __future__ import annotations

import random

import pytest

from core.validate import ConfigError
from pipeline.chunking import ChunkPlan
from pipeline.timing import (
    ExecutionMode,
    ExponentialLatency,
    FixedLatency,
    NormalLatency,
    StagePlan,
    StageSpec,
    UniformLatency,
    draw_durations,
    latency_from_mapping,
    schedule_stage_times,
    simulate_timing,
)

CHUNK = ChunkPlan(chunk_seconds=5.0)
TOL = 1e-9


def test_default_latencies_do_not_lag_sequentially():
    plan = StagePlan.fixed([0.94, 0.05, 1.0, 1.05])
    report = simulate_timing(plan, CHUNK, n_chunks=10, seed=0)
    assert report.max_lag_s == pytest.approx(3.04, abs=TOL)
    assert all(lag == pytest.approx(3.04, abs=TOL) for lag in report.lags())
    assert report.per_chunk[0].arrival_s == 5.0


def test_six_second_stages_lag_grows_sequentially_but_not_pipelined():
    latencies = [3.0, 1.0, 1.0, 1.0]
    n = 12
    sequential = simulate_timing(StagePlan.fixed(latencies), CHUNK, n, seed=0)
    for index, lag in enumerate(sequential.lags(), start=1):
        assert lag == pytest.approx(6.0 + (index - 1) * 1.0, abs=TOL)

    pipelined = simulate_timing(StagePlan.fixed(latencies, mode="pipelined"), CHUNK, n, seed=0)
    assert all(lag == pytest.approx(6.0, abs=TOL) for lag in pipelined.lags())
    assert pipelined.max_lag_s < sequential.max_lag_s


def test_queue_capacity_must_be_positive():
    with pytest.raises(ConfigError):
        simulate_timing(StagePlan.fixed([1, 1, 1, 1], queue_capacity=0), CHUNK, 3, seed=0)
    with pytest.raises(ConfigError):
        schedule_stage_times([[1.0]], [1.0], ExecutionMode.PIPELINED, 0)


def test_stage_order_is_fixed():
    stages = StagePlan().stages
    with pytest.raises(ConfigError):
        StagePlan(stages=(stages[1], stages[0], stages[2], stages[3]))


def test_latency_models():
    assert isinstance(latency_from_mapping(0.5), FixedLatency)
    assert isinstance(latency_from_mapping({"kind": "normal", "mean": 1, "std": 0.1}), NormalLatency)
    assert isinstance(latency_from_mapping({"kind": "exponential", "mean": 1}), ExponentialLatency)
    assert isinstance(latency_from_mapping({"kind": "uniform", "low": 0, "high": 1}), UniformLatency)
    with pytest.raises(ConfigError):
        latency_from_mapping({"kind": "gamma"})
    with pytest.raises(ConfigError):
        latency_from_mapping({"kind": "uniform", "low": 0})
    with pytest.raises(ConfigError):
        FixedLatency(-1.0)


def test_same_seed_same_report():
    stages = tuple(
        StageSpec(name, NormalLatency(1.2, 0.4)) for name in ("stt", "qe", "qa", "tts")
    )
    plan = StagePlan(stages=stages)
    first = simulate_timing(plan, CHUNK, 20, seed=42)
    second = simulate_timing(plan, CHUNK, 20, seed=42)
    assert first == second
    assert simulate_timing(plan, CHUNK, 20, seed=43) != first


def _random_plan(rng: random.Random, mode: ExecutionMode, capacity: int) -> StagePlan:
    def model():
        kind = rng.choice(["fixed", "uniform", "exponential", "normal"])
        if kind == "fixed":
            return FixedLatency(rng.uniform(0.0, 3.0))
        if kind == "uniform":
            low = rng.uniform(0.0, 2.0)
            return UniformLatency(low, low + rng.uniform(0.0, 2.0))
        if kind == "exponential":
            return ExponentialLatency(rng.uniform(0.1, 2.0))
        return NormalLatency(rng.uniform(0.0, 2.5), rng.uniform(0.0, 1.0))

    stages = tuple(StageSpec(name, model()) for name in ("stt", "qe", "qa", "tts"))
    return StagePlan(stages=stages, mode=mode, queue_capacity=capacity)


def test_sequential_matches_closed_form_recurrence():
    for trial in range(100):
        rng = random.Random(trial)
        plan = _random_plan(rng, ExecutionMode.SEQUENTIAL, 8)
        chunk = ChunkPlan(chunk_seconds=rng.uniform(1.0, 6.0))
        n = rng.randint(1, 15)
        report = simulate_timing(plan, chunk, n, seed=trial)
        durations = draw_durations(plan, n, trial)
        previous = 0.0
        for i, timing in enumerate(report.per_chunk, start=1):
            expected = max(chunk.arrival_s(i), previous) + sum(durations[i - 1])
            assert timing.completion_s == pytest.approx(expected, abs=TOL)
            previous = expected


def test_pipelined_matches_tandem_recurrence_and_never_exceeds_sequential():
    for trial in range(100):
        rng = random.Random(1000 + trial)
        chunk = ChunkPlan(chunk_seconds=rng.uniform(1.0, 6.0))
        n = rng.randint(1, 15)
        unbounded = _random_plan(rng, ExecutionMode.PIPELINED, 64)
        durations = draw_durations(unbounded, n, trial)
        arrivals = [chunk.arrival_s(i) for i in range(1, n + 1)]

        done = [[0.0] * 4 for _ in range(n)]
        for i in range(n):
            ready = arrivals[i]
            for s in range(4):
                start = max(ready, done[i - 1][s] if i else 0.0)
                done[i][s] = start + durations[i][s]
                ready = done[i][s]
        pipelined = schedule_stage_times(durations, arrivals, ExecutionMode.PIPELINED, 64)
        for expected_row, row in zip(done, pipelined):
            assert row == pytest.approx(expected_row, abs=TOL)

        sequential = schedule_stage_times(durations, arrivals, ExecutionMode.SEQUENTIAL, 8)
        for capacity in (1, 2, 64):
            bounded = schedule_stage_times(durations, arrivals, ExecutionMode.PIPELINED, capacity)
            for fast, slow in zip(bounded, sequential):
                assert fast[-1] <= slow[-1] + TOL


def test_lag_is_bounded_exactly_when_stages_keep_up():
    for trial in range(100):
        rng = random.Random(5000 + trial)
        latencies = [rng.uniform(0.0, 4.0) for _ in range(4)]
        chunk_seconds = rng.uniform(1.0, 6.0)
        chunk = ChunkPlan(chunk_seconds=chunk_seconds)
        n = 20
        total, slowest = sum(latencies), max(latencies)

        sequential = simulate_timing(StagePlan.fixed(latencies), chunk, n, seed=0).lags()
        if total <= chunk_seconds:
            assert all(lag == pytest.approx(total, abs=TOL) for lag in sequential)
        else:
            for i, lag in enumerate(sequential):
                assert lag == pytest.approx(total + i * (total - chunk_seconds), abs=1e-6)

        pipelined = simulate_timing(
            StagePlan.fixed(latencies, mode="pipelined", queue_capacity=rng.randint(1, 8)), chunk, n, seed=0
        ).lags()
        if slowest <= chunk_seconds:
            assert all(lag == pytest.approx(total, abs=1e-6) for lag in pipelined)
        else:
            assert pipelined[-1] >= pipelined[0] + (n - 1) * (slowest - chunk_seconds) - 1e-6


def test_report_aggregates():
    report = simulate_timing(StagePlan.fixed([1.0, 1.0, 1.0, 1.0]), CHUNK, 4, seed=0)
    assert report.mean_lag_s == pytest.approx(4.0)
    assert report.throughput_chunks_per_s == pytest.approx(4 / 24.0)
    assert report.to_dict()["mode"] == "sequential"
    with pytest.raises(ValueError):
        simulate_timing(StagePlan(), CHUNK, 0, seed=0)
