"""The question-extraction state machine."""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .classifier import ClueClassifier, ClueLabel, classify_segment, resolve_classifier
from .detector import DetectorConfig, detect_riddle_end, detect_riddle_start
from .events import EventKind, SegmentationEvent, TimedSegment


class SequenceError(ValueError):
    """Raised when segments arrive out of order."""


class Phase(str, Enum):
    IDLE = "idle"
    ACTIVE = "active"


@dataclass(frozen=True, slots=True)
class SessionState:
    phase: Phase = Phase.IDLE
    riddle_index: int = 0
    clues: tuple[str, ...] = ()
    riddles_seen: int = 0
    last_seq: int | None = None

    def __post_init__(self) -> None:
        if self.phase is Phase.IDLE and (self.clues or self.riddle_index):
            raise ValueError("an idle session holds no riddle and no clues")

    @property
    def active(self) -> bool:
        return self.phase is Phase.ACTIVE


def _end(state: SessionState, seq: int | None) -> tuple[SessionState, SegmentationEvent]:
    event = SegmentationEvent(EventKind.RIDDLE_ENDED, state.riddle_index, seq=seq)
    return replace(state, phase=Phase.IDLE, riddle_index=0, clues=()), event


def advance(
    state: SessionState,
    segment: TimedSegment,
    config: DetectorConfig,
    classifier: ClueClassifier | None = None,
) -> tuple[SessionState, list[SegmentationEvent]]:
    """Consume one segment. The input state is never mutated, so a failure leaves it intact.

    A segment that opens or closes a riddle is consumed by the boundary and is not
    classified.
    """

    if state.last_seq is not None and segment.seq <= state.last_seq:
        raise SequenceError(f"segment seq {segment.seq} is not after {state.last_seq}")

    events: list[SegmentationEvent] = []
    text = segment.text.strip()
    current = replace(state, last_seq=segment.seq)
    if not text:
        return current, events

    if detect_riddle_start(text, config):
        if current.active:
            current, ended = _end(current, segment.seq)
            events.append(ended)
        index = current.riddles_seen + 1
        current = replace(current, phase=Phase.ACTIVE, riddle_index=index, riddles_seen=index, clues=())
        events.append(SegmentationEvent(EventKind.RIDDLE_STARTED, index, text=text, seq=segment.seq))
        return current, events

    if not current.active:
        return current, events

    if detect_riddle_end(text, config):
        current, ended = _end(current, segment.seq)
        events.append(replace(ended, text=text))
        return current, events

    port = classifier if classifier is not None else resolve_classifier(config.classifier)
    label = classify_segment(text, port, segment=segment)
    if label is ClueLabel.CLUE:
        clues = current.clues + (text,)
        current = replace(current, clues=clues)
        events.append(
            SegmentationEvent(EventKind.CLUE, current.riddle_index, text=text, clue_number=len(clues), seq=segment.seq)
        )
    else:
        events.append(SegmentationEvent(EventKind.NON_CLUE, current.riddle_index, text=text, seq=segment.seq))
    return current, events


def finish(state: SessionState) -> tuple[SessionState, list[SegmentationEvent]]:
    """Close an active riddle at end of stream."""

    if not state.active:
        return state, []
    ended_state, event = _end(state, None)
    return ended_state, [event]


def segment_stream(
    segments: list[TimedSegment],
    config: DetectorConfig,
    classifier: ClueClassifier | None = None,
) -> list[SegmentationEvent]:
    port = classifier if classifier is not None else resolve_classifier(config.classifier)
    state = SessionState()
    events: list[SegmentationEvent] = []
    for segment in segments:
        state, emitted = advance(state, segment, config, port)
        events.extend(emitted)
    _, tail = finish(state)
    events.extend(tail)
    return events


__all__ = ["SequenceError", "Phase", "SessionState", "advance", "finish", "segment_stream"]
