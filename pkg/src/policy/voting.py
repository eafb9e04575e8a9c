"""Confidence voting: running tallies of normalized answers across input steps."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from riddles.normalize import normalize_answer

DEFAULT_SAMPLES_PER_STEP = 3
DEFAULT_THRESHOLD = 3


class PolicyStateError(RuntimeError):
    """Raised when voting continues after an attempt was made."""


@dataclass(frozen=True, slots=True)
class QaSampleSet:
    input_text: str
    candidates: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))


@dataclass(frozen=True, slots=True)
class VoteState:
    threshold: int = DEFAULT_THRESHOLD
    samples_per_step: int = DEFAULT_SAMPLES_PER_STEP
    tallies: Mapping[str, int] = field(default_factory=dict)
    # Global ordinal of each answer's first sample; lower wins ties.
    first_seen: Mapping[str, int] = field(default_factory=dict)
    samples_seen: int = 0
    attempted: bool = False
    steps_taken: int = 0

    def __post_init__(self) -> None:
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.samples_per_step < 1:
            raise ValueError("samples_per_step must be >= 1")


def vote_step(state: VoteState, samples: QaSampleSet) -> tuple[VoteState, str | None]:
    """Tally one step's candidates and return the raw answer to attempt, if any."""

    if state.attempted:
        raise PolicyStateError("vote_step called after an attempt was already made")
    if len(samples.candidates) != state.samples_per_step:
        raise ValueError(
            f"expected {state.samples_per_step} candidates per step, got {len(samples.candidates)}"
        )

    tallies = dict(state.tallies)
    first_seen = dict(state.first_seen)
    raw_in_step: dict[str, str] = {}
    ordinal = state.samples_seen
    for candidate in samples.candidates:
        key = normalize_answer(candidate)
        ordinal += 1
        if not key:
            continue
        tallies[key] = tallies.get(key, 0) + 1
        first_seen.setdefault(key, ordinal)
        raw_in_step.setdefault(key, candidate)

    answer: str | None = None
    ready = [key for key, count in tallies.items() if count >= state.threshold]
    if ready:
        winner = min(ready, key=lambda key: (-tallies[key], first_seen[key]))
        answer = raw_in_step.get(winner, winner)

    updated = replace(
        state,
        tallies=tallies,
        first_seen=first_seen,
        samples_seen=ordinal,
        attempted=answer is not None,
        steps_taken=state.steps_taken + 1,
    )
    return updated, answer


def record_failed_step(state: VoteState) -> VoteState:
    """Count a step whose QA call failed; it contributes no tallies."""

    if state.attempted:
        raise PolicyStateError("record_failed_step called after an attempt was already made")
    return replace(state, steps_taken=state.steps_taken + 1, samples_seen=state.samples_seen + state.samples_per_step)


def top_answers(state: VoteState, limit: int = 3) -> Sequence[tuple[str, int]]:
    ordered = sorted(state.tallies.items(), key=lambda item: (-item[1], state.first_seen[item[0]]))
    return ordered[:limit]


__all__ = [
    "DEFAULT_SAMPLES_PER_STEP",
    "DEFAULT_THRESHOLD",
    "PolicyStateError",
    "QaSampleSet",
    "VoteState",
    "vote_step",
    "record_failed_step",
    "top_answers",
]
