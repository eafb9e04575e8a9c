"""Clue-indexed scoring, attempt records and report aggregation."""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Mapping, Sequence

from riddles.dataset import Riddle, RiddleDataset

from .matching import NO_MATCH, MatchResult, match_answer

VALID_POINTS = frozenset({0, 3, 4, 5})


class ScoringError(ValueError):
    """Raised for clue numbers outside the scoring domain."""


class AggregationError(ValueError):
    """Raised when attempt records cannot be aggregated against a dataset."""


def points_for_clue(clue_number: int) -> int:
    """5 points on clue 1, 4 on clue 2, 3 on clue 3 or any clue after it."""

    if clue_number < 1:
        raise ScoringError(f"clue_number must be >= 1, got {clue_number}")
    if clue_number == 1:
        return 5
    if clue_number == 2:
        return 4
    return 3


@dataclass(frozen=True, slots=True)
class AttemptRecord:
    riddle_id: str
    attempted: bool
    answer: str | None = None
    step_index: int = 0
    match: MatchResult = NO_MATCH
    points: int = 0
    clue_number: int | None = None
    subject: str | None = None

    def __post_init__(self) -> None:
        if self.step_index < 0:
            raise ValueError("step_index must be >= 0")
        if self.points not in VALID_POINTS:
            raise ValueError(f"points must be one of {sorted(VALID_POINTS)}, got {self.points}")
        if not self.attempted and (self.answer is not None or self.match.fm or self.points):
            raise ValueError(f"Record {self.riddle_id}: unattempted riddles carry no answer, match or points")
        if self.points > 0 and not self.match.em:
            raise ValueError(f"Record {self.riddle_id}: points require an exact match")

    @classmethod
    def unattempted(cls, riddle: Riddle) -> "AttemptRecord":
        return cls(riddle_id=riddle.id, attempted=False, subject=_subject(riddle))

    @classmethod
    def scored(
        cls,
        riddle: Riddle,
        answer: str,
        *,
        step_index: int,
        clue_number: int | None,
    ) -> "AttemptRecord":
        """Match ``answer`` against ``riddle`` and award clue points for an exact match."""

        match = match_answer(answer, riddle)
        points = points_for_clue(clue_number) if match.em and clue_number is not None else 0
        return cls(
            riddle_id=riddle.id,
            attempted=True,
            answer=answer,
            step_index=step_index,
            match=match,
            points=points,
            clue_number=clue_number,
            subject=_subject(riddle),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "riddle_id": self.riddle_id,
            "subject": self.subject,
            "attempted": self.attempted,
            "answer": self.answer,
            "step_index": self.step_index,
            "clue_number": self.clue_number,
            "em": self.match.em,
            "fm": self.match.fm,
            "matched_truth": self.match.matched_truth,
            "points": self.points,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "AttemptRecord":
        return cls(
            riddle_id=str(payload["riddle_id"]),
            attempted=bool(payload["attempted"]),
            answer=payload.get("answer"),
            step_index=int(payload.get("step_index", 0)),
            match=MatchResult(
                em=bool(payload.get("em", False)),
                fm=bool(payload.get("fm", False)),
                matched_truth=payload.get("matched_truth"),
            ),
            points=int(payload.get("points", 0)),
            clue_number=payload.get("clue_number"),
            subject=payload.get("subject"),
        )


def _subject(riddle: Riddle) -> str | None:
    return riddle.subject.value if riddle.subject else None


def _pct(count: int, total: int) -> float:
    return 100.0 * count / total if total else 0.0


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Aggregated accuracy over every riddle of a dataset; percentages use all riddles as denominator."""

    records: tuple[AttemptRecord, ...]
    protocol: str = "all_clues"
    fm_reported: bool = True
    n_riddles: int = field(init=False)
    n_attempted: int = field(init=False)
    em_pct: float = field(init=False)
    fm_pct: float | None = field(init=False)
    total_points: int = field(init=False)
    per_subject: Mapping[str, tuple[float, float | None]] = field(init=False)

    def __post_init__(self) -> None:
        records = self.records
        n = len(records)
        object.__setattr__(self, "n_riddles", n)
        object.__setattr__(self, "n_attempted", sum(1 for r in records if r.attempted))
        object.__setattr__(self, "em_pct", _pct(sum(1 for r in records if r.match.em), n))
        fm = _pct(sum(1 for r in records if r.match.fm), n) if self.fm_reported else None
        object.__setattr__(self, "fm_pct", fm)
        object.__setattr__(self, "total_points", sum(r.points for r in records))

        grouped: "OrderedDict[str, list[AttemptRecord]]" = OrderedDict()
        for record in records:
            if record.subject is not None:
                grouped.setdefault(record.subject, []).append(record)
        per_subject: Dict[str, tuple[float, float | None]] = {}
        for subject in sorted(grouped):
            members = grouped[subject]
            em = _pct(sum(1 for r in members if r.match.em), len(members))
            fm_subject = _pct(sum(1 for r in members if r.match.fm), len(members)) if self.fm_reported else None
            per_subject[subject] = (em, fm_subject)
        object.__setattr__(self, "per_subject", per_subject)

    def record_for(self, riddle_id: str) -> AttemptRecord:
        for record in self.records:
            if record.riddle_id == riddle_id:
                return record
        raise KeyError(riddle_id)


def aggregate_report(
    records: Iterable[AttemptRecord],
    dataset: RiddleDataset,
    *,
    protocol: str = "all_clues",
    fm_reported: bool = True,
) -> EvalReport:
    """Order records by dataset position and fill riddles without a record as unattempted."""

    by_id: Dict[str, AttemptRecord] = {}
    for record in records:
        if record.riddle_id not in dataset:
            raise AggregationError(f"Unknown riddle id '{record.riddle_id}'")
        if record.riddle_id in by_id:
            raise AggregationError(f"Duplicate record for riddle id '{record.riddle_id}'")
        by_id[record.riddle_id] = record
    ordered: Sequence[AttemptRecord] = tuple(
        by_id.get(riddle.id) or AttemptRecord.unattempted(riddle) for riddle in dataset
    )
    return EvalReport(records=tuple(ordered), protocol=protocol, fm_reported=fm_reported)


__all__ = [
    "ScoringError",
    "AggregationError",
    "points_for_clue",
    "AttemptRecord",
    "EvalReport",
    "aggregate_report",
]
