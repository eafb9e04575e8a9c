"""Answer and clue text normalization."""
from __future__ import annotations

import re

ARTICLES = frozenset({"the", "a", "an"})

# Anything that is not a letter, digit or whitespace; ``\w`` admits "_" so it is listed explicitly.
_PUNCT_RE = re.compile(r"[^\w\s]|_")


def strip_punctuation(text: str) -> str:
    return _PUNCT_RE.sub("", text)


def normalize_tokens(text: str) -> list[str]:
    """Case-fold, drop punctuation and split on whitespace. Articles are kept."""

    return strip_punctuation(text.casefold()).split()


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace and drop standalone articles.

    >>> normalize_answer("The Polarization!")
    'polarization'
    >>> normalize_answer("H2SO4 (sulphuric acid)")
    'h2so4 sulphuric acid'
    """

    return " ".join(token for token in normalize_tokens(text or "") if token not in ARTICLES)


def normalize_clue_text(text: str) -> str:
    return " ".join(normalize_tokens(text or ""))


__all__ = ["ARTICLES", "strip_punctuation", "normalize_tokens", "normalize_answer", "normalize_clue_text"]
