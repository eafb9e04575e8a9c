"""Replay transcripts: CSV files of timed source segments, and synthetic readings of riddles."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd

from core.csv_json import read_csv_file
from core.storage import write_dataframe_csv
from core.validate import RowValidationError, require_columns
from riddles.dataset import Riddle
from segmentation.events import TimedSegment

logger = logging.getLogger(__name__)

REPLAY_COLUMNS: tuple[str, ...] = ("start_s", "end_s", "text")
ORDINALS: tuple[str, ...] = ("first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth")


def _seconds(value: str, *, line: int, field: str, source: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise RowValidationError(line, f"'{field}' must be a number, got {value!r}", source) from exc


def load_replay_transcript(path: Path | str) -> list[TimedSegment]:
    """Read ``start_s, end_s, text`` rows (plus optional ``riddle_id``) as ordered segments."""

    source = str(path)
    df = read_csv_file(path)
    require_columns(df.columns, REPLAY_COLUMNS, source=source)
    segments: list[TimedSegment] = []
    for offset, row in enumerate(df.to_dict(orient="records")):
        line = offset + 2
        start = _seconds(row["start_s"], line=line, field="start_s", source=source)
        end = _seconds(row["end_s"], line=line, field="end_s", source=source)
        if segments and start < segments[-1].start_s:
            raise RowValidationError(line, "start_s must be non-decreasing", source)
        try:
            segment = TimedSegment(
                text=str(row["text"]),
                start_s=start,
                end_s=end,
                seq=offset + 1,
                riddle_id=str(row.get("riddle_id", "") or "").strip() or None,
            )
        except ValueError as exc:
            raise RowValidationError(line, str(exc), source) from exc
        segments.append(segment)
    logger.info("Loaded %d replay segments from %s", len(segments), path)
    return segments


def write_replay_transcript(segments: Iterable[TimedSegment], path: Path | str) -> Path:
    rows = [
        {
            "start_s": repr(float(s.start_s)),
            "end_s": repr(float(s.end_s)),
            "text": s.text,
            "riddle_id": s.riddle_id or "",
        }
        for s in segments
    ]
    return write_dataframe_csv(path, pd.DataFrame(rows, columns=[*REPLAY_COLUMNS, "riddle_id"]))


def announcement(index: int) -> str:
    ordinal = ORDINALS[index - 1] if index <= len(ORDINALS) else f"number {index}"
    return f"{ordinal} riddle"


def synthesize_transcript(
    riddles: Sequence[Riddle],
    *,
    segment_seconds: float = 5.0,
    announcements: Sequence[str] | None = None,
    interjections: dict[tuple[str, int], str] | None = None,
) -> list[TimedSegment]:
    """Lay out a reading of ``riddles``: one announcement then one segment per clue.

    Every segment occupies exactly one ``segment_seconds`` window, so with an equal
    chunk length each chunk carries one announcement or one clue. ``interjections``
    inserts extra host speech after clue ``n`` of a riddle, keyed ``(riddle_id, n)``.
    """

    if segment_seconds <= 0:
        raise ValueError("segment_seconds must be positive")
    extra = interjections or {}
    texts: list[tuple[str, str]] = []
    for position, riddle in enumerate(riddles, start=1):
        opener = announcements[position - 1] if announcements and position <= len(announcements) else announcement(position)
        texts.append((opener, riddle.id))
        for number, clue in enumerate(riddle.clues, start=1):
            texts.append((clue, riddle.id))
            if (riddle.id, number) in extra:
                texts.append((extra[(riddle.id, number)], riddle.id))
    return [
        TimedSegment(
            text=text,
            start_s=index * segment_seconds,
            end_s=(index + 1) * segment_seconds,
            seq=index + 1,
            riddle_id=riddle_id,
        )
        for index, (text, riddle_id) in enumerate(texts)
    ]


__all__ = [
    "REPLAY_COLUMNS",
    "load_replay_transcript",
    "write_replay_transcript",
    "announcement",
    "synthesize_transcript",
]
