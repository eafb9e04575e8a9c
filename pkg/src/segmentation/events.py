"""Transcript segments flowing in, segmentation events flowing out."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable

from core.storage import dumps_jsonl


@dataclass(frozen=True, slots=True)
class TimedSegment:
    """A transcript fragment with stream-time boundaries.

    ``riddle_id`` is an optional replay annotation naming the riddle the text belongs
    to; segmentation never reads it, only scoring does.
    """

    text: str
    start_s: float
    end_s: float
    seq: int
    riddle_id: str | None = None

    def __post_init__(self) -> None:
        if self.start_s < 0:
            raise ValueError(f"segment {self.seq}: start_s must be >= 0")
        if not self.end_s > self.start_s:
            raise ValueError(f"segment {self.seq}: end_s must be greater than start_s")

    @property
    def midpoint_s(self) -> float:
        return (self.start_s + self.end_s) / 2.0


class EventKind(str, Enum):
    RIDDLE_STARTED = "riddle_started"
    CLUE = "clue"
    NON_CLUE = "non_clue"
    RIDDLE_ENDED = "riddle_ended"


@dataclass(frozen=True, slots=True)
class SegmentationEvent:
    kind: EventKind
    riddle_index: int
    text: str = ""
    clue_number: int | None = None
    seq: int | None = None

    def __post_init__(self) -> None:
        if self.kind is EventKind.CLUE and (self.clue_number is None or self.clue_number < 1):
            raise ValueError("clue events carry a 1-based clue_number")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "riddle_index": self.riddle_index,
            "clue_number": self.clue_number,
            "text": self.text,
            "seq": self.seq,
        }


def events_to_jsonl(events: Iterable[SegmentationEvent]) -> str:
    return dumps_jsonl([event.to_dict() for event in events])


__all__ = ["TimedSegment", "EventKind", "SegmentationEvent", "events_to_jsonl"]
