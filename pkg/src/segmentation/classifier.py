"""Clue vs. non-clue classification behind a swappable port."""
from __future__ import annotations

from enum import Enum
from typing import Callable, Dict, Protocol, runtime_checkable

from riddles.normalize import normalize_tokens

from .detector import contains_any


class ClueLabel(str, Enum):
    CLUE = "clue"
    NON_CLUE = "non_clue"


class ClassifierError(RuntimeError):
    """A classifier port failed on a segment; the segment is kept for retry or skip."""

    def __init__(self, message: str, segment: object = None) -> None:
        super().__init__(message)
        self.segment = segment


@runtime_checkable
class ClueClassifier(Protocol):
    concurrent_safe: bool

    def classify(self, text: str) -> ClueLabel: ...


CLUE_MARKERS: tuple[str, ...] = ("i am", "i was", "i describe", "my", "who am i")
ADMIN_MARKERS: tuple[str, ...] = ("points", "school", "bell", "we begin", "correct answer")


def rule_baseline_classifier(text: str) -> ClueLabel:
    """First-person riddle phrasing is a clue unless quiz-administration phrasing is also present."""

    if not text.strip():
        raise ValueError("cannot classify an empty segment")
    tokens = normalize_tokens(text)
    if contains_any(tokens, ADMIN_MARKERS):
        return ClueLabel.NON_CLUE
    if contains_any(tokens, CLUE_MARKERS):
        return ClueLabel.CLUE
    return ClueLabel.NON_CLUE


class RuleBaselineClassifier:
    concurrent_safe = True

    def classify(self, text: str) -> ClueLabel:
        return rule_baseline_classifier(text)


def classify_segment(text: str, classifier: ClueClassifier, *, segment: object = None) -> ClueLabel:
    if not text.strip():
        raise ValueError("cannot classify an empty segment")
    try:
        return ClueLabel(classifier.classify(text))
    except Exception as exc:  # any port failure becomes a stage error
        raise ClassifierError(f"classifier failed: {exc}", segment if segment is not None else text) from exc


CLASSIFIERS: Dict[str, Callable[[], ClueClassifier]] = {
    "rule_baseline": RuleBaselineClassifier,
}


def resolve_classifier(name: str) -> ClueClassifier:
    try:
        factory = CLASSIFIERS[name]
    except KeyError as exc:
        raise ValueError(f"Unknown classifier '{name}'. Known: {', '.join(sorted(CLASSIFIERS))}") from exc
    return factory()


__all__ = [
    "ClueLabel",
    "ClassifierError",
    "ClueClassifier",
    "CLUE_MARKERS",
    "ADMIN_MARKERS",
    "rule_baseline_classifier",
    "RuleBaselineClassifier",
    "classify_segment",
    "CLASSIFIERS",
    "resolve_classifier",
]
