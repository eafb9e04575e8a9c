"""Timed and word-count chunking of transcript streams."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from segmentation.events import TimedSegment

DEFAULT_CHUNK_SECONDS = 5.0
DEFAULT_WORDS_PER_CHUNK = 7


@dataclass(frozen=True, slots=True)
class ChunkPlan:
    chunk_seconds: float = DEFAULT_CHUNK_SECONDS
    words_per_chunk: int = DEFAULT_WORDS_PER_CHUNK

    def __post_init__(self) -> None:
        if not self.chunk_seconds > 0:
            raise ValueError("chunk_seconds must be positive")
        if self.words_per_chunk < 1:
            raise ValueError("words_per_chunk must be positive")

    def arrival_s(self, seq: int) -> float:
        """Chunk ``seq`` (1-based) is complete, and so available, when its window closes."""

        return seq * self.chunk_seconds


def chunk_timed_stream(segments: Iterable[TimedSegment], plan: ChunkPlan) -> list[TimedSegment]:
    """Partition stream time into ``chunk_seconds`` windows; each segment goes to the window holding its midpoint."""

    source = list(segments)
    if not source:
        return []
    for before, after in zip(source, source[1:]):
        if after.start_s < before.start_s:
            raise ValueError("source segments must have non-decreasing start times")

    width = plan.chunk_seconds
    stream_end = max(segment.end_s for segment in source)
    n_windows = max(1, math.ceil(stream_end / width))
    texts: list[list[str]] = [[] for _ in range(n_windows)]
    owners: list[str | None] = [None] * n_windows
    for segment in source:
        window = min(int(segment.midpoint_s // width), n_windows - 1)
        text = segment.text.strip()
        if text:
            texts[window].append(text)
        if segment.riddle_id:
            owners[window] = segment.riddle_id

    chunks: list[TimedSegment] = []
    for index in range(n_windows):
        start = index * width
        end = min((index + 1) * width, stream_end)
        if end <= start:  # pragma: no cover - guarded by ceil above
            end = start + width
        chunks.append(
            TimedSegment(
                text=" ".join(texts[index]),
                start_s=start,
                end_s=end,
                seq=index + 1,
                riddle_id=owners[index],
            )
        )
    return chunks


def chunk_words(text: str, plan: ChunkPlan) -> list[str]:
    """Group whitespace tokens into consecutive runs of ``words_per_chunk``; the last may be shorter."""

    words = text.split()
    size = plan.words_per_chunk
    return [" ".join(words[i : i + size]) for i in range(0, len(words), size)]


def accumulate(chunks: Sequence[str]) -> list[str]:
    """Running concatenation: step ``k`` holds chunks ``1..k``."""

    steps: list[str] = []
    running: list[str] = []
    for chunk in chunks:
        running.append(chunk)
        steps.append(" ".join(running))
    return steps


__all__ = [
    "DEFAULT_CHUNK_SECONDS",
    "DEFAULT_WORDS_PER_CHUNK",
    "ChunkPlan",
    "chunk_timed_stream",
    "chunk_words",
    "accumulate",
]
