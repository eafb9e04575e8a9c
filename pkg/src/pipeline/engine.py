"""Chunk-by-chunk orchestration of STT, question extraction, QA and TTS over adapter ports.

Semantics always follow stream order: every stage handles chunks FIFO and owns its
own state, so the events produced do not depend on the execution mode. The mode only
changes when things happen, which the virtual clock derives from port latencies.
"""
from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from adapters.ports import AdapterError, AdapterSuite, QaPort, QaRequest
from core.storage import dumps_jsonl
from core.validate import ConfigError
from policy.prompt import DEFAULT_PROMPT_TEMPLATE, PromptTemplate
from policy.runner import ask
from policy.voting import DEFAULT_SAMPLES_PER_STEP, VoteState, top_answers
from riddles.dataset import RiddleDataset
from scoring.report import AttemptRecord, EvalReport, aggregate_report
from segmentation.classifier import ClassifierError
from segmentation.detector import DetectorConfig
from segmentation.events import EventKind, SegmentationEvent, TimedSegment
from segmentation.session import SessionState, advance, finish

from .chunking import ChunkPlan, chunk_timed_stream
from .timing import STAGE_NAMES, ExecutionMode, StagePlan, TimingReport, build_report, schedule_stage_times

logger = logging.getLogger(__name__)

CLOCKS: tuple[str, ...] = ("virtual", "wall")
DEFAULT_MAX_CONSECUTIVE_FAILURES = 3
_STOP = object()


class PipelineAborted(RuntimeError):
    """Raised when one port keeps failing; carries a human-readable diagnostic."""

    def __init__(self, diagnostic: str, *, port: str = "", chunk_seq: int | None = None) -> None:
        super().__init__(diagnostic)
        self.diagnostic = diagnostic
        self.port = port
        self.chunk_seq = chunk_seq


@dataclass(frozen=True, slots=True)
class LogEntry:
    ts_s: float
    chunk_seq: int
    stage: str
    kind: str
    payload: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ts_s": self.ts_s,
            "chunk_seq": self.chunk_seq,
            "stage": self.stage,
            "kind": self.kind,
            "payload": dict(self.payload),
        }


@dataclass(frozen=True, slots=True)
class PipelineResult:
    events: tuple[LogEntry, ...]
    records: tuple[AttemptRecord, ...]
    timing: TimingReport
    segmentation: tuple[SegmentationEvent, ...] = ()
    spoken: tuple[str, ...] = ()

    def event_log_jsonl(self) -> str:
        return dumps_jsonl([entry.to_dict() for entry in self.events])

    def entries(self, stage: str | None = None, kind: str | None = None) -> list[LogEntry]:
        return [
            entry
            for entry in self.events
            if (stage is None or entry.stage == stage) and (kind is None or entry.kind == kind)
        ]

    def report(self, dataset: RiddleDataset, *, protocol: str = "live") -> EvalReport:
        """Aggregate against ``dataset``; attempts on riddles outside it are dropped."""

        known = [record for record in self.records if record.riddle_id in dataset]
        dropped = len(self.records) - len(known)
        if dropped:
            logger.warning("Dropping %d attempt(s) on riddles not in the dataset", dropped)
        return aggregate_report(known, dataset, protocol=protocol, fm_reported=True)


@dataclass(slots=True)
class _ChunkWork:
    chunk: TimedSegment
    transcript: TimedSegment | None = None
    seg_events: list[SegmentationEvent] = field(default_factory=list)
    # (clue event, clues of its riddle up to and including it)
    clue_inputs: list[tuple[SegmentationEvent, tuple[str, ...]]] = field(default_factory=list)
    attempts: list[str] = field(default_factory=list)
    entries: dict[str, list[tuple[str, dict[str, Any]]]] = field(
        default_factory=lambda: {name: [] for name in STAGE_NAMES}
    )
    durations: list[float] = field(default_factory=lambda: [0.0] * len(STAGE_NAMES))
    stamps: list[float] = field(default_factory=lambda: [0.0] * len(STAGE_NAMES))
    arrival_s: float = 0.0
    failed: bool = False


class _RetryingQa:
    """QA port proxy retrying ``AdapterError`` before the policy sees a failed step."""

    def __init__(self, inner: QaPort, retryer: Retrying) -> None:
        self.inner = inner
        self.retryer = retryer
        self.concurrent_safe = getattr(inner, "concurrent_safe", False)
        self.latency_s = float(getattr(inner, "latency_s", 0.0) or 0.0)

    def generate(self, request: QaRequest) -> list[str]:
        return self.retryer.copy()(self.inner.generate, request)


class _Stages:
    def __init__(
        self,
        adapters: AdapterSuite,
        *,
        detector: DetectorConfig,
        threshold: int,
        dataset: RiddleDataset | None,
        template: PromptTemplate,
        samples_per_step: int,
        stage_plan: StagePlan,
        seed: int,
        max_consecutive_failures: int,
        stage_attempts: int,
    ) -> None:
        self.adapters = adapters
        self.detector = detector
        self.threshold = threshold
        self.dataset = dataset
        self.template = template
        self.samples_per_step = samples_per_step
        self.stage_plan = stage_plan
        self.seed = seed
        self.max_failures = max_consecutive_failures
        self.retryer = Retrying(
            stop=stop_after_attempt(stage_attempts),
            retry=retry_if_exception_type((AdapterError, ClassifierError)),
            reraise=True,
        )
        self.qa_port = _RetryingQa(adapters.qa, self.retryer)

        self.session = SessionState()
        self.votes: dict[int, VoteState] = {}
        self.attempted_ids: set[str] = set()
        self.records: list[AttemptRecord] = []
        self.segmentation: list[SegmentationEvent] = []
        self.spoken: list[str] = []
        self.consecutive: dict[str, int] = {name: 0 for name in STAGE_NAMES}

    # bookkeeping

    def call(self, fn: Callable[..., Any], *args: Any) -> Any:
        return self.retryer.copy()(fn, *args)

    def planned(self, stage_index: int, seq: int) -> float:
        rng = np.random.default_rng([self.seed, seq, stage_index])
        return self.stage_plan.stages[stage_index].latency.draw(rng)

    def succeeded(self, stage: str) -> None:
        self.consecutive[stage] = 0

    def failed(self, work: _ChunkWork, stage: str, exc: Exception) -> None:
        work.failed = True
        work.entries[stage].append(("failed", {"error": str(exc)}))
        count = self.consecutive[stage] + 1
        self.consecutive[stage] = count
        logger.warning("Chunk %d: %s stage failed (%d in a row): %s", work.chunk.seq, stage, count, exc)
        if count >= self.max_failures:
            diagnostic = f"{stage} port failed on {count} consecutive chunks; last error: {exc}"
            logger.error("Aborting pipeline at chunk %d: %s", work.chunk.seq, diagnostic)
            raise PipelineAborted(diagnostic, port=stage, chunk_seq=work.chunk.seq)

    # stages

    def stt(self, work: _ChunkWork) -> None:
        chunk = work.chunk
        try:
            transcript = self.call(self.adapters.stt.transcribe, chunk)
        except AdapterError as exc:
            work.durations[0] = self.planned(0, chunk.seq)
            self.failed(work, "stt", exc)
            return
        self.succeeded("stt")
        work.durations[0] = max(0.0, float(transcript.latency_s))
        work.transcript = TimedSegment(
            text=transcript.text,
            start_s=chunk.start_s,
            end_s=chunk.end_s,
            seq=chunk.seq,
            riddle_id=chunk.riddle_id,
        )
        work.entries["stt"].append(("transcribed", {"text": transcript.text}))

    def qe(self, work: _ChunkWork) -> None:
        if work.failed or work.transcript is None:
            return
        work.durations[1] = self.planned(1, work.chunk.seq)
        try:
            state, events = self.call(advance, self.session, work.transcript, self.detector, self.adapters.classifier)
        except ClassifierError as exc:
            self.failed(work, "qe", exc)
            return
        self.succeeded("qe")
        self.session = state
        self.record_segmentation(work, events)
        for event in events:
            if event.kind is EventKind.CLUE:
                work.clue_inputs.append((event, state.clues[: event.clue_number]))

    def record_segmentation(self, work: _ChunkWork, events: Sequence[SegmentationEvent]) -> None:
        work.seg_events.extend(events)
        self.segmentation.extend(events)
        for event in events:
            work.entries["qe"].append((event.kind.value, event.to_dict()))

    def qa(self, work: _ChunkWork) -> None:
        if work.failed:
            return
        for event in work.seg_events:
            if event.kind is EventKind.RIDDLE_STARTED:
                self.votes[event.riddle_index] = VoteState(threshold=self.threshold, samples_per_step=self.samples_per_step)
        for event, clues in work.clue_inputs:
            riddle_id = work.chunk.riddle_id or f"live-{event.riddle_index}"
            vote = self.votes.get(event.riddle_index)
            if vote is None or vote.attempted or riddle_id in self.attempted_ids:
                continue
            input_text = " ".join(clues)
            result = ask(vote, input_text, self.qa_port, self.template, clues=clues)
            self.votes[event.riddle_index] = result.state
            work.durations[2] += self.qa_port.latency_s
            if result.failed:
                self.failed(work, "qa", AdapterError(result.error or "QA step failed", port="qa"))
                return
            self.succeeded("qa")
            work.entries["qa"].append(
                (
                    "voted",
                    {
                        "riddle_index": event.riddle_index,
                        "riddle_id": riddle_id,
                        "clue_number": event.clue_number,
                        "step": result.state.steps_taken,
                        "top": [[answer, count] for answer, count in top_answers(result.state)],
                    },
                )
            )
            if result.answer is not None:
                self.attempt(work, riddle_id, result.answer, result.state.steps_taken, event.clue_number)

    def attempt(self, work: _ChunkWork, riddle_id: str, answer: str, step_index: int, clue_number: int | None) -> None:
        self.attempted_ids.add(riddle_id)
        if self.dataset is not None and riddle_id in self.dataset:
            record = AttemptRecord.scored(
                self.dataset.get(riddle_id), answer, step_index=step_index, clue_number=clue_number
            )
        else:
            record = AttemptRecord(
                riddle_id=riddle_id, attempted=True, answer=answer, step_index=step_index, clue_number=clue_number
            )
        self.records.append(record)
        work.attempts.append(answer)
        work.entries["qa"].append(
            (
                "attempt",
                {
                    "riddle_id": riddle_id,
                    "answer": answer,
                    "clue_number": clue_number,
                    "step_index": step_index,
                    "em": record.match.em,
                    "points": record.points,
                },
            )
        )
        logger.info("Attempt on %s at clue %s: %r (em=%s)", riddle_id, clue_number, answer, record.match.em)

    def tts(self, work: _ChunkWork) -> None:
        if work.failed or not work.attempts:
            return
        for answer in work.attempts:
            try:
                utterance = self.call(self.adapters.tts.synthesize, answer)
            except AdapterError as exc:
                work.durations[3] += self.planned(3, work.chunk.seq)
                self.failed(work, "tts", exc)
                return
            self.succeeded("tts")
            work.durations[3] += max(0.0, float(utterance.latency_s))
            self.spoken.append(utterance.handle)
            work.entries["tts"].append(("spoken", {"answer": answer, "handle": utterance.handle}))

    def ordered(self) -> tuple[Callable[[_ChunkWork], None], ...]:
        return (self.stt, self.qe, self.qa, self.tts)

    def close_stream(self, last: _ChunkWork | None) -> None:
        self.session, events = finish(self.session)
        if last is not None and events:
            self.record_segmentation(last, events)


def _assemble(works: Sequence[_ChunkWork], completions: Sequence[Sequence[float]]) -> tuple[LogEntry, ...]:
    entries: list[LogEntry] = []
    for work, stage_times in zip(works, completions):
        for index, stage in enumerate(STAGE_NAMES):
            for kind, payload in work.entries[stage]:
                entries.append(LogEntry(float(stage_times[index]), work.chunk.seq, stage, kind, payload))
    return tuple(entries)


def _run_virtual(stages: _Stages, chunks: Sequence[TimedSegment], chunk: ChunkPlan, plan: StagePlan):
    works: list[_ChunkWork] = []
    for item in chunks:
        work = _ChunkWork(item, arrival_s=chunk.arrival_s(item.seq))
        for stage in stages.ordered():
            stage(work)
        works.append(work)
    stages.close_stream(works[-1] if works else None)
    arrivals = [work.arrival_s for work in works]
    completions = schedule_stage_times([work.durations for work in works], arrivals, plan.mode, plan.queue_capacity)
    return works, arrivals, completions


def _await_arrival(origin: float, chunk: ChunkPlan, seq: int, pace: float) -> float:
    """Hold chunk ``seq`` until its window closes, scaled by ``pace``; unpaced chunks arrive on demand.

    With ``pace`` 0 the returned arrival is the enqueue time, so lag only measures processing.
    """

    if pace <= 0:
        return time.monotonic() - origin
    due = chunk.arrival_s(seq) * pace
    delay = due - (time.monotonic() - origin)
    if delay > 0:
        time.sleep(delay)
    return due


def _run_wall_sequential(stages: _Stages, chunks: Sequence[TimedSegment], chunk: ChunkPlan, pace: float):
    origin = time.monotonic()
    works: list[_ChunkWork] = []
    for item in chunks:
        work = _ChunkWork(item, arrival_s=_await_arrival(origin, chunk, item.seq, pace))
        for index, stage in enumerate(stages.ordered()):
            stage(work)
            work.stamps[index] = time.monotonic() - origin
        works.append(work)
    stages.close_stream(works[-1] if works else None)
    return works, [work.arrival_s for work in works], [work.stamps for work in works]


def _run_wall_pipelined(
    stages: _Stages, chunks: Sequence[TimedSegment], capacity: int, chunk: ChunkPlan, pace: float
):
    """One thread per stage, bounded FIFO queues between them; a full queue blocks its producer.

    Each port is driven by a single stage thread, so calls to a port are never concurrent.
    """

    origin = time.monotonic()
    channels = [queue.Queue(maxsize=capacity) for _ in STAGE_NAMES]
    finished: list[_ChunkWork] = []
    errors: list[BaseException] = []
    halted = threading.Event()

    def worker(index: int, stage: Callable[[_ChunkWork], None]) -> None:
        inbox = channels[index]
        outbox = channels[index + 1] if index + 1 < len(channels) else None
        while True:
            work = inbox.get()
            if work is _STOP:
                if outbox is not None:
                    outbox.put(_STOP)
                return
            if not halted.is_set():
                try:
                    stage(work)
                except BaseException as exc:  # re-raised on the calling thread
                    errors.append(exc)
                    halted.set()
                work.stamps[index] = time.monotonic() - origin
            if outbox is not None:
                outbox.put(work)
            else:
                finished.append(work)

    threads = [
        threading.Thread(target=worker, args=(index, stage), name=f"stage-{STAGE_NAMES[index]}", daemon=True)
        for index, stage in enumerate(stages.ordered())
    ]
    for thread in threads:
        thread.start()
    for item in chunks:
        if halted.is_set():
            break
        channels[0].put(_ChunkWork(item, arrival_s=_await_arrival(origin, chunk, item.seq, pace)))
    channels[0].put(_STOP)
    for thread in threads:
        thread.join()
    if errors:
        raise errors[0]
    stages.close_stream(finished[-1] if finished else None)
    return finished, [work.arrival_s for work in finished], [work.stamps for work in finished]


def run_pipeline(
    source: Iterable[TimedSegment],
    adapters: AdapterSuite,
    chunk: ChunkPlan,
    detector: DetectorConfig,
    threshold: int,
    *,
    dataset: RiddleDataset | None = None,
    template: PromptTemplate = DEFAULT_PROMPT_TEMPLATE,
    samples_per_step: int = DEFAULT_SAMPLES_PER_STEP,
    stage_plan: StagePlan | None = None,
    mode: ExecutionMode | str | None = None,
    seed: int = 0,
    max_consecutive_failures: int = DEFAULT_MAX_CONSECUTIVE_FAILURES,
    stage_attempts: int = 1,
    clock: str = "virtual",
    wall_pace: float = 0.0,
) -> PipelineResult:
    """Replay ``source`` through STT, question extraction, QA and TTS.

    QA runs on every clue event of a riddle that has no attempt yet, with the riddle's
    clues so far as input; an attempt triggers TTS. Attempts are attributed to the
    chunk's ``riddle_id`` annotation, or ``live-<riddle_index>`` without one. A failed
    stage marks the chunk failed and skips its downstream stages; ``max_consecutive_failures``
    failures of the same port in a row raise :class:`PipelineAborted`.

    On the wall clock, ``wall_pace`` > 0 releases chunk ``i`` at ``i * chunk_seconds * wall_pace``
    seconds so lag reflects a live stream; ``wall_pace`` 1 is real time.
    """

    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    if max_consecutive_failures < 1:
        raise ConfigError("max_consecutive_failures must be >= 1")
    if stage_attempts < 1:
        raise ConfigError("stage_attempts must be >= 1")
    if wall_pace < 0:
        raise ConfigError("wall_pace must be >= 0")
    if clock not in CLOCKS:
        raise ConfigError(f"Unknown clock '{clock}'. Known: {', '.join(CLOCKS)}")
    plan = stage_plan or StagePlan()
    if mode is not None:
        plan = StagePlan(stages=plan.stages, mode=ExecutionMode(mode), queue_capacity=plan.queue_capacity)

    chunks = chunk_timed_stream(source, chunk)
    logger.info(
        "Running pipeline over %d chunks (%s, %s clock, threshold %d)", len(chunks), plan.mode.value, clock, threshold
    )
    stages = _Stages(
        adapters,
        detector=detector,
        threshold=threshold,
        dataset=dataset,
        template=template,
        samples_per_step=samples_per_step,
        stage_plan=plan,
        seed=seed,
        max_consecutive_failures=max_consecutive_failures,
        stage_attempts=stage_attempts,
    )
    if clock == "virtual":
        works, arrivals, completions = _run_virtual(stages, chunks, chunk, plan)
    elif plan.mode is ExecutionMode.PIPELINED:
        works, arrivals, completions = _run_wall_pipelined(stages, chunks, plan.queue_capacity, chunk, wall_pace)
    else:
        works, arrivals, completions = _run_wall_sequential(stages, chunks, chunk, wall_pace)

    timing = build_report(completions, arrivals, plan.mode, seqs=[work.chunk.seq for work in works])
    return PipelineResult(
        events=_assemble(works, completions),
        records=tuple(stages.records),
        timing=timing,
        segmentation=tuple(stages.segmentation),
        spoken=tuple(stages.spoken),
    )


__all__ = [
    "CLOCKS",
    "DEFAULT_MAX_CONSECUTIVE_FAILURES",
    "PipelineAborted",
    "LogEntry",
    "PipelineResult",
    "run_pipeline",
]
