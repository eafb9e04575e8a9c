"""Stage latency models and discrete-event scheduling of chunks through the four stages."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Protocol, Sequence

import numpy as np
import simpy

from core.validate import ConfigError

from .chunking import ChunkPlan

STAGE_NAMES: tuple[str, ...] = ("stt", "qe", "qa", "tts")
DEFAULT_QUEUE_CAPACITY = 8


class ExecutionMode(str, Enum):
    SEQUENTIAL = "sequential"
    PIPELINED = "pipelined"


class LatencyModel(Protocol):
    def draw(self, rng: np.random.Generator) -> float: ...

    def to_dict(self) -> dict[str, Any]: ...


@dataclass(frozen=True, slots=True)
class FixedLatency:
    seconds: float

    def __post_init__(self) -> None:
        if self.seconds < 0:
            raise ConfigError("fixed latency must be non-negative")

    def draw(self, rng: np.random.Generator) -> float:
        return self.seconds

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "fixed", "seconds": self.seconds}


@dataclass(frozen=True, slots=True)
class NormalLatency:
    """Normal draws clipped at zero."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if self.mean < 0 or self.std < 0:
            raise ConfigError("normal latency needs non-negative mean and std")

    def draw(self, rng: np.random.Generator) -> float:
        return max(0.0, float(rng.normal(self.mean, self.std)))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "normal", "mean": self.mean, "std": self.std}


@dataclass(frozen=True, slots=True)
class ExponentialLatency:
    mean: float

    def __post_init__(self) -> None:
        if self.mean < 0:
            raise ConfigError("exponential latency needs a non-negative mean")

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.exponential(self.mean)) if self.mean > 0 else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "exponential", "mean": self.mean}


@dataclass(frozen=True, slots=True)
class UniformLatency:
    low: float
    high: float

    def __post_init__(self) -> None:
        if self.low < 0 or self.high < self.low:
            raise ConfigError("uniform latency needs 0 <= low <= high")

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "uniform", "low": self.low, "high": self.high}


def latency_from_mapping(spec: Mapping[str, Any] | float | int) -> LatencyModel:
    if isinstance(spec, (int, float)):
        return FixedLatency(float(spec))
    kind = str(spec.get("kind", "fixed")).lower()
    try:
        if kind == "fixed":
            return FixedLatency(float(spec["seconds"]))
        if kind == "normal":
            return NormalLatency(float(spec["mean"]), float(spec["std"]))
        if kind == "exponential":
            return ExponentialLatency(float(spec["mean"]))
        if kind == "uniform":
            return UniformLatency(float(spec["low"]), float(spec["high"]))
    except KeyError as exc:
        raise ConfigError(f"latency model '{kind}' is missing {exc.args[0]!r}") from exc
    raise ConfigError(f"Unknown latency model kind '{kind}'")


@dataclass(frozen=True, slots=True)
class StageSpec:
    name: str
    latency: LatencyModel
    skippable: bool = False


DEFAULT_STAGE_LATENCIES: Mapping[str, float] = {"stt": 0.94, "qe": 0.05, "qa": 1.0, "tts": 1.05}


def default_stages(latencies: Mapping[str, float] = DEFAULT_STAGE_LATENCIES) -> tuple[StageSpec, ...]:
    return tuple(
        StageSpec(name, FixedLatency(float(latencies[name])), skippable=name in {"qa", "tts"})
        for name in STAGE_NAMES
    )


@dataclass(frozen=True, slots=True)
class StagePlan:
    stages: tuple[StageSpec, ...] = field(default_factory=default_stages)
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "mode", ExecutionMode(self.mode))
        names = tuple(stage.name for stage in self.stages)
        if names != STAGE_NAMES:
            raise ConfigError(f"stages must be exactly {', '.join(STAGE_NAMES)} in order, got {', '.join(names)}")
        if self.queue_capacity < 1:
            raise ConfigError("queue_capacity must be >= 1")

    @classmethod
    def fixed(cls, latencies: Sequence[float], mode: ExecutionMode | str = ExecutionMode.SEQUENTIAL, **kwargs: Any) -> "StagePlan":
        if len(latencies) != len(STAGE_NAMES):
            raise ConfigError(f"expected {len(STAGE_NAMES)} stage latencies, got {len(latencies)}")
        stages = default_stages(dict(zip(STAGE_NAMES, latencies)))
        return cls(stages=stages, mode=ExecutionMode(mode), **kwargs)


@dataclass(frozen=True, slots=True)
class ChunkTiming:
    seq: int
    arrival_s: float
    completion_s: float
    stage_completions_s: tuple[float, ...] = ()

    @property
    def lag_s(self) -> float:
        return self.completion_s - self.arrival_s

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "arrival_s": self.arrival_s,
            "completion_s": self.completion_s,
            "lag_s": self.lag_s,
        }


@dataclass(frozen=True, slots=True)
class TimingReport:
    per_chunk: tuple[ChunkTiming, ...]
    mode: ExecutionMode = ExecutionMode.SEQUENTIAL

    @property
    def max_lag_s(self) -> float:
        return max((c.lag_s for c in self.per_chunk), default=0.0)

    @property
    def mean_lag_s(self) -> float:
        if not self.per_chunk:
            return 0.0
        return sum(c.lag_s for c in self.per_chunk) / len(self.per_chunk)

    @property
    def throughput_chunks_per_s(self) -> float:
        last = max((c.completion_s for c in self.per_chunk), default=0.0)
        return len(self.per_chunk) / last if last > 0 else 0.0

    def lags(self) -> list[float]:
        return [c.lag_s for c in self.per_chunk]

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "max_lag_s": self.max_lag_s,
            "mean_lag_s": self.mean_lag_s,
            "throughput_chunks_per_s": self.throughput_chunks_per_s,
            "per_chunk": [c.to_dict() for c in self.per_chunk],
        }


def schedule_stage_times(
    durations: Sequence[Sequence[float]],
    arrivals: Sequence[float],
    mode: ExecutionMode,
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
) -> list[list[float]]:
    """Run chunks through the stages on a virtual clock; returns completion time per chunk and stage.

    Sequential: one worker carries a chunk through every stage before taking the next.
    Pipelined: one worker per stage, FIFO hand-off through stores of ``queue_capacity``;
    a full store blocks the producer.
    """

    if queue_capacity < 1:
        raise ConfigError("queue_capacity must be >= 1")
    n_chunks = len(durations)
    if len(arrivals) != n_chunks:
        raise ValueError("durations and arrivals must have the same length")
    if n_chunks == 0:
        return []
    n_stages = len(durations[0])
    if any(d < 0 for row in durations for d in row):
        raise ValueError("stage durations must be non-negative")
    done = [[0.0] * n_stages for _ in range(n_chunks)]
    env = simpy.Environment()

    def wait_until(moment: float):
        if moment > env.now:
            yield env.timeout(moment - env.now)

    if ExecutionMode(mode) is ExecutionMode.SEQUENTIAL:

        def worker():
            for i in range(n_chunks):
                yield from wait_until(arrivals[i])
                for s in range(n_stages):
                    yield env.timeout(durations[i][s])
                    done[i][s] = env.now

        env.process(worker())
    else:
        stores = [simpy.Store(env, capacity=queue_capacity) for _ in range(n_stages)]

        def source():
            for i in range(n_chunks):
                yield from wait_until(arrivals[i])
                yield stores[0].put(i)

        def stage_worker(s: int):
            for _ in range(n_chunks):
                i = yield stores[s].get()
                yield env.timeout(durations[i][s])
                done[i][s] = env.now
                if s + 1 < n_stages:
                    yield stores[s + 1].put(i)

        env.process(source())
        for s in range(n_stages):
            env.process(stage_worker(s))

    env.run()
    return done


def draw_durations(plan: StagePlan, n_chunks: int, seed: int) -> list[list[float]]:
    """Chunk-major, stage-minor draws from one generator, identical for both modes."""

    rng = np.random.default_rng(seed)
    return [[stage.latency.draw(rng) for stage in plan.stages] for _ in range(n_chunks)]


def build_report(
    completions: Sequence[Sequence[float]],
    arrivals: Sequence[float],
    mode: ExecutionMode,
    seqs: Sequence[int] | None = None,
) -> TimingReport:
    numbers = list(seqs) if seqs is not None else list(range(1, len(arrivals) + 1))
    per_chunk = tuple(
        ChunkTiming(
            seq=numbers[i],
            arrival_s=arrivals[i],
            completion_s=max(completions[i][-1], arrivals[i]) if completions[i] else arrivals[i],
            stage_completions_s=tuple(completions[i]),
        )
        for i in range(len(arrivals))
    )
    return TimingReport(per_chunk=per_chunk, mode=ExecutionMode(mode))


def simulate_timing(plan: StagePlan, chunk: ChunkPlan, n_chunks: int, seed: int = 0) -> TimingReport:
    """Chunk ``i`` (1-based) arrives at ``i * chunk_seconds`` and flows through the plan's stages."""

    if n_chunks < 1:
        raise ValueError("n_chunks must be >= 1")
    if plan.queue_capacity < 1:  # pragma: no cover - StagePlan already refuses this
        raise ConfigError("queue_capacity must be >= 1")
    arrivals = [chunk.arrival_s(i) for i in range(1, n_chunks + 1)]
    durations = draw_durations(plan, n_chunks, seed)
    completions = schedule_stage_times(durations, arrivals, plan.mode, plan.queue_capacity)
    return build_report(completions, arrivals, plan.mode)


__all__ = [
    "STAGE_NAMES",
    "DEFAULT_QUEUE_CAPACITY",
    "DEFAULT_STAGE_LATENCIES",
    "ExecutionMode",
    "LatencyModel",
    "FixedLatency",
    "NormalLatency",
    "ExponentialLatency",
    "UniformLatency",
    "latency_from_mapping",
    "StageSpec",
    "default_stages",
    "StagePlan",
    "ChunkTiming",
    "TimingReport",
    "schedule_stage_times",
    "draw_durations",
    "build_report",
    "simulate_timing",
]
