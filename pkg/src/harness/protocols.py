"""Offline evaluation protocols: all clues at once, mock-live chunk feeding, and the human benchmark."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, TypeVar

from adapters.ports import AdapterError, QaPort, QaRequest, checked_answers
from core.validate import ConfigError
from pipeline.chunking import ChunkPlan, accumulate, chunk_words
from policy.prompt import DEFAULT_PROMPT_TEMPLATE, PromptTemplate, build_prompt
from policy.runner import run_policy
from policy.voting import DEFAULT_SAMPLES_PER_STEP, DEFAULT_THRESHOLD
from riddles.annotations import HumanAnnotation
from riddles.dataset import Riddle, RiddleDataset
from riddles.normalize import normalize_clue_text
from scoring.matching import MatchResult
from scoring.report import AggregationError, AttemptRecord, EvalReport, aggregate_report, points_for_clue

logger = logging.getLogger(__name__)

T = TypeVar("T")


class EvalProtocol(str, Enum):
    ALL_CLUES = "all_clues"
    MOCK_LIVE = "mock_live"


class VoteGranularity(str, Enum):
    PER_CHUNK = "per_chunk"
    PER_CLUE = "per_clue"


@dataclass(frozen=True, slots=True)
class EvalConfig:
    protocol: EvalProtocol = EvalProtocol.ALL_CLUES
    threshold: int = DEFAULT_THRESHOLD
    chunking: ChunkPlan = field(default_factory=ChunkPlan)
    vote_granularity: VoteGranularity = VoteGranularity.PER_CHUNK
    seed: int = 0
    qa_backend: str = "oracle"
    oracle_from_clue: int = 3
    samples_per_step: int = DEFAULT_SAMPLES_PER_STEP
    normalize_clues: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "protocol", EvalProtocol(self.protocol))
        object.__setattr__(self, "vote_granularity", VoteGranularity(self.vote_granularity))
        if self.threshold < 1:
            raise ConfigError("threshold must be >= 1")
        if self.samples_per_step < 1:
            raise ConfigError("samples_per_step must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.oracle_from_clue < 1:
            raise ConfigError("oracle_from_clue must be >= 1")
        if self.protocol is EvalProtocol.MOCK_LIVE and self.chunking is None:
            raise ConfigError("mock_live needs a chunking plan")


def _map_riddles(dataset: RiddleDataset, fn: Callable[[Riddle], T], qa: QaPort, workers: int) -> list[T]:
    """Apply ``fn`` per riddle, in dataset order; threads only for ports that allow concurrent calls."""

    if workers > 1 and getattr(qa, "concurrent_safe", False):
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="riddle") as pool:
            return list(pool.map(fn, dataset))
    if workers > 1:
        logger.info("QA backend is not concurrency-safe; evaluating riddles one at a time")
    return [fn(riddle) for riddle in dataset]


def _require_riddles(dataset: RiddleDataset) -> None:
    if len(dataset) == 0:
        raise ValueError("evaluation needs a nonempty dataset")


def _clue_texts(riddle: Riddle, normalize: bool) -> list[str]:
    return [normalize_clue_text(clue) if normalize else clue.strip() for clue in riddle.clues]


def eval_all_clues(
    dataset: RiddleDataset,
    qa: QaPort,
    template: PromptTemplate = DEFAULT_PROMPT_TEMPLATE,
    *,
    config: EvalConfig | None = None,
) -> EvalReport:
    """One answer per riddle from all of its clues concatenated; no voting."""

    _require_riddles(dataset)
    cfg = config or EvalConfig()
    logger.info("all_clues evaluation over %d riddles", len(dataset))

    def evaluate(riddle: Riddle) -> AttemptRecord:
        clues = _clue_texts(riddle, cfg.normalize_clues)
        request = QaRequest(input_text=" ".join(clues), prompt=build_prompt(clues, template), n_samples=1)
        try:
            answer = checked_answers(qa, request)[0]
        except AdapterError as exc:
            logger.warning("QA failed on riddle %s, scoring it unattempted: %s", riddle.id, exc)
            return AttemptRecord.unattempted(riddle)
        if not answer.strip():
            return AttemptRecord.unattempted(riddle)
        return AttemptRecord.scored(riddle, answer, step_index=len(clues), clue_number=len(clues))

    records = _map_riddles(dataset, evaluate, qa, cfg.workers)
    return aggregate_report(records, dataset, protocol=EvalProtocol.ALL_CLUES.value)


def mock_live_steps(riddle: Riddle, config: EvalConfig) -> tuple[list[str], list[int]]:
    """Accumulated inputs and, per step, the clue holding the step's last word."""

    clues = _clue_texts(riddle, config.normalize_clues)
    if config.vote_granularity is VoteGranularity.PER_CLUE:
        return accumulate(clues), list(range(1, len(clues) + 1))

    owners: list[int] = []
    for number, clue in enumerate(clues, start=1):
        owners.extend([number] * len(clue.split()))
    chunks = chunk_words(" ".join(clues), config.chunking)
    clue_of_step: list[int] = []
    consumed = 0
    for piece in chunks:
        consumed += len(piece.split())
        clue_of_step.append(owners[consumed - 1])
    return accumulate(chunks), clue_of_step


def eval_mock_live(
    dataset: RiddleDataset,
    qa: QaPort,
    config: EvalConfig,
    template: PromptTemplate = DEFAULT_PROMPT_TEMPLATE,
) -> EvalReport:
    """Feed growing prefixes of each riddle to the voting policy, as a live contestant would hear them."""

    _require_riddles(dataset)
    if config.protocol is not EvalProtocol.MOCK_LIVE:
        raise ConfigError("eval_mock_live needs protocol=mock_live")
    logger.info(
        "mock_live evaluation over %d riddles (%s, threshold %d)",
        len(dataset),
        config.vote_granularity.value,
        config.threshold,
    )

    def evaluate(riddle: Riddle) -> AttemptRecord:
        steps, clue_of_step = mock_live_steps(riddle, config)
        if not steps:
            return AttemptRecord.unattempted(riddle)
        step_clues = None
        if config.vote_granularity is VoteGranularity.PER_CLUE:
            clues = _clue_texts(riddle, config.normalize_clues)
            step_clues = [clues[:number] for number in clue_of_step]
        outcome = run_policy(
            steps, qa, config.threshold, template, samples_per_step=config.samples_per_step, step_clues=step_clues
        )
        if outcome.failed_steps:
            logger.warning("Riddle %s: %d QA step(s) failed", riddle.id, outcome.failed_steps)
        if not outcome.attempted or outcome.answer is None:
            return AttemptRecord.unattempted(riddle)
        return AttemptRecord.scored(
            riddle,
            outcome.answer,
            step_index=outcome.step_index,
            clue_number=clue_of_step[outcome.step_index - 1],
        )

    records = _map_riddles(dataset, evaluate, qa, config.workers)
    return aggregate_report(records, dataset, protocol=EvalProtocol.MOCK_LIVE.value)


def human_benchmark(dataset: RiddleDataset, annotations: Iterable[HumanAnnotation]) -> EvalReport:
    """Score the best human team from annotations; FM is not defined for humans and is left out."""

    by_id: dict[str, HumanAnnotation] = {}
    for annotation in annotations:
        if annotation.riddle_id not in dataset:
            raise AggregationError(f"Annotation for unknown riddle id '{annotation.riddle_id}'")
        if annotation.riddle_id in by_id:
            raise AggregationError(f"Duplicate annotation for riddle id '{annotation.riddle_id}'")
        by_id[annotation.riddle_id] = annotation

    missing = [riddle.id for riddle in dataset if riddle.id not in by_id]
    if missing:
        logger.warning("%d riddle(s) have no annotation and count as unanswered: %s", len(missing), ", ".join(missing[:5]))

    records: list[AttemptRecord] = []
    for riddle in dataset:
        annotation = by_id.get(riddle.id)
        if annotation is None or not annotation.answered:
            records.append(AttemptRecord.unattempted(riddle))
            continue
        match = MatchResult(em=annotation.correct, fm=annotation.correct, matched_truth=riddle.answer if annotation.correct else None)
        clue = annotation.clue_number
        if clue is not None and clue > len(riddle.clues):
            raise AggregationError(
                f"Annotation for riddle id '{riddle.id}' names clue {clue} but the riddle has {len(riddle.clues)}"
            )
        records.append(
            AttemptRecord(
                riddle_id=riddle.id,
                attempted=True,
                answer=riddle.answer if annotation.correct else None,
                step_index=clue or 0,
                match=match,
                points=points_for_clue(clue) if annotation.correct and clue else 0,
                clue_number=clue,
                subject=riddle.subject.value if riddle.subject else None,
            )
        )
    return aggregate_report(records, dataset, protocol="human", fm_reported=False)


def run_evaluation(
    dataset: RiddleDataset,
    qa: QaPort,
    config: EvalConfig,
    template: PromptTemplate = DEFAULT_PROMPT_TEMPLATE,
) -> EvalReport:
    logger.info("Evaluating with confidence threshold %d", config.threshold)
    if config.protocol is EvalProtocol.MOCK_LIVE:
        return eval_mock_live(dataset, qa, config, template)
    return eval_all_clues(dataset, qa, template, config=config)


__all__ = [
    "EvalProtocol",
    "VoteGranularity",
    "EvalConfig",
    "eval_all_clues",
    "mock_live_steps",
    "eval_mock_live",
    "human_benchmark",
    "run_evaluation",
]
