"""Riddle boundary detection over normalized token sequences."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from riddles.normalize import normalize_tokens

DEFAULT_START_PHRASES: tuple[str, ...] = (
    "first riddle",
    "second riddle",
    "third riddle",
    "fourth riddle",
    "fifth riddle",
    "next riddle",
    "we begin",
    "riddle number one",
    "riddle number two",
    "riddle number three",
    "riddle number four",
)
DEFAULT_END_PHRASES: tuple[str, ...] = (
    "that is the end of the riddle",
    "the answer is",
)
LENIENT_KEYWORD = "riddle"
DEFAULT_CLASSIFIER = "rule_baseline"


@dataclass(frozen=True, slots=True)
class DetectorConfig:
    start_phrases: tuple[str, ...] = DEFAULT_START_PHRASES
    end_phrases: tuple[str, ...] = DEFAULT_END_PHRASES
    lenient_keyword: bool = False
    classifier: str = DEFAULT_CLASSIFIER

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_phrases", tuple(self.start_phrases))
        object.__setattr__(self, "end_phrases", tuple(self.end_phrases))
        if not any(normalize_tokens(phrase) for phrase in self.start_phrases):
            raise ValueError("start_phrases must contain at least one nonempty phrase")


def contains_phrase(tokens: Sequence[str], phrase: str) -> bool:
    """True when the normalized phrase occurs as a contiguous run of ``tokens``."""

    needle = normalize_tokens(phrase)
    if not needle or len(needle) > len(tokens):
        return False
    width = len(needle)
    return any(list(tokens[i : i + width]) == needle for i in range(len(tokens) - width + 1))


def contains_any(tokens: Sequence[str], phrases: Iterable[str]) -> bool:
    return any(contains_phrase(tokens, phrase) for phrase in phrases)


def detect_riddle_start(text: str, config: DetectorConfig) -> bool:
    tokens = normalize_tokens(text)
    if contains_any(tokens, config.start_phrases):
        return True
    return config.lenient_keyword and LENIENT_KEYWORD in tokens


def detect_riddle_end(text: str, config: DetectorConfig) -> bool:
    return contains_any(normalize_tokens(text), config.end_phrases)


__all__ = [
    "DEFAULT_START_PHRASES",
    "DEFAULT_END_PHRASES",
    "DEFAULT_CLASSIFIER",
    "LENIENT_KEYWORD",
    "DetectorConfig",
    "contains_phrase",
    "contains_any",
    "detect_riddle_start",
    "detect_riddle_end",
]
