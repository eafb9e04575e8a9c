"""Exact and fuzzy answer matching against a riddle's ground truths."""
from __future__ import annotations

from dataclasses import dataclass

from riddles.dataset import Riddle
from riddles.normalize import normalize_answer


@dataclass(frozen=True, slots=True)
class MatchResult:
    em: bool
    fm: bool
    matched_truth: str | None = None

    def __post_init__(self) -> None:
        if self.em and not self.fm:
            raise ValueError("an exact match is always a fuzzy match")


NO_MATCH = MatchResult(em=False, fm=False)


def _normalized_truths(riddle: Riddle) -> list[tuple[str, str]]:
    pairs = [(truth, normalize_answer(truth)) for truth in riddle.truths]
    # An empty normalized truth (e.g. an answer of just "the") never matches.
    return [(truth, norm) for truth, norm in pairs if norm]


def exact_match(candidate: str, riddle: Riddle) -> bool:
    normalized = normalize_answer(candidate)
    return any(normalized == truth for _, truth in _normalized_truths(riddle))


def fuzzy_match(candidate: str, riddle: Riddle) -> bool:
    """True when some normalized truth is a substring of the normalized candidate."""

    normalized = normalize_answer(candidate)
    return any(truth in normalized for _, truth in _normalized_truths(riddle))


def match_answer(candidate: str | None, riddle: Riddle) -> MatchResult:
    if candidate is None:
        return NO_MATCH
    normalized = normalize_answer(candidate)
    truths = _normalized_truths(riddle)
    for raw, truth in truths:
        if normalized == truth:
            return MatchResult(em=True, fm=True, matched_truth=raw)
    for raw, truth in truths:
        if truth in normalized:
            return MatchResult(em=False, fm=True, matched_truth=raw)
    return NO_MATCH


__all__ = ["MatchResult", "NO_MATCH", "exact_match", "fuzzy_match", "match_answer"]
