"""Word error rate via word-level minimum edit distance."""
from __future__ import annotations

from dataclasses import dataclass


class MetricError(ValueError):
    """Raised when a metric is undefined for its inputs."""


@dataclass(frozen=True, slots=True)
class EditCounts:
    substitutions: int
    deletions: int
    insertions: int

    @property
    def total(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def word_edit_counts(reference: str, hypothesis: str) -> EditCounts:
    """Minimum word edit script from ``reference`` to ``hypothesis``, split by operation."""

    ref = _tokens(reference)
    hyp = _tokens(hypothesis)
    rows, cols = len(ref) + 1, len(hyp) + 1
    cost = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        cost[i][0] = i
    for j in range(cols):
        cost[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            if ref[i - 1] == hyp[j - 1]:
                cost[i][j] = cost[i - 1][j - 1]
            else:
                cost[i][j] = 1 + min(cost[i - 1][j - 1], cost[i - 1][j], cost[i][j - 1])

    subs = dels = ins = 0
    i, j = len(ref), len(hyp)
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and cost[i][j] == cost[i - 1][j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and cost[i][j] == cost[i - 1][j - 1] + 1:
            subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and cost[i][j] == cost[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditCounts(substitutions=subs, deletions=dels, insertions=ins)


def word_error_rate(reference: str, hypothesis: str) -> float:
    """(S + D + I) / N over lowercased whitespace tokens; punctuation is left as produced.

    >>> word_error_rate("first riddle", "test riddle")
    0.5
    """

    n_words = len(_tokens(reference))
    if n_words == 0:
        raise MetricError("word error rate is undefined for an empty reference")
    return word_edit_counts(reference, hypothesis).total / n_words


__all__ = ["MetricError", "EditCounts", "word_edit_counts", "word_error_rate"]
