"""Human-performance annotations: which riddles the best team answered, and on which clue."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import pandas as pd

from core.csv_json import read_csv_file
from core.storage import write_dataframe_csv
from core.validate import RowValidationError, parse_bool, parse_optional_int, require_columns

logger = logging.getLogger(__name__)

ANNOTATION_COLUMNS: tuple[str, ...] = ("riddle_id", "answered", "clue_number", "correct")


@dataclass(frozen=True, slots=True)
class HumanAnnotation:
    riddle_id: str
    answered: bool
    clue_number: int | None
    correct: bool

    def __post_init__(self) -> None:
        if not self.answered and (self.clue_number is not None or self.correct):
            raise ValueError(f"Annotation {self.riddle_id}: unanswered riddles carry no clue number and are not correct")
        if self.clue_number is not None and self.clue_number < 1:
            raise ValueError(f"Annotation {self.riddle_id}: clue_number must be >= 1")
        if self.answered and self.clue_number is None:
            raise ValueError(f"Annotation {self.riddle_id}: answered riddles need a clue_number")


def annotations_from_frame(df: pd.DataFrame, *, source: str = "") -> list[HumanAnnotation]:
    require_columns(df.columns, ANNOTATION_COLUMNS, source=source or None)
    annotations: list[HumanAnnotation] = []
    for offset, row in enumerate(df.to_dict(orient="records")):
        line = offset + 2
        riddle_id = str(row["riddle_id"]).strip()
        if not riddle_id:
            raise RowValidationError(line, "'riddle_id' is empty", source)
        answered = parse_bool(row["answered"], row=line, field="answered", source=source)
        correct = parse_bool(row["correct"], row=line, field="correct", source=source)
        clue_number = parse_optional_int(row["clue_number"], row=line, field="clue_number", source=source)
        try:
            annotations.append(HumanAnnotation(riddle_id, answered, clue_number, correct))
        except ValueError as exc:
            raise RowValidationError(line, str(exc), source) from exc
    return annotations


def load_annotations(path: Path | str) -> list[HumanAnnotation]:
    """Load the annotation CSV (``riddle_id, answered, clue_number, correct``).

    Unknown riddle ids are accepted here; the harness cross-checks them against a dataset.
    """

    annotations = annotations_from_frame(read_csv_file(path), source=str(path))
    logger.info("Loaded %d human annotations from %s", len(annotations), path)
    return annotations


def write_annotations(annotations: Iterable[HumanAnnotation], path: Path | str) -> Path:
    rows = [
        {
            "riddle_id": a.riddle_id,
            "answered": "true" if a.answered else "false",
            "clue_number": "" if a.clue_number is None else str(a.clue_number),
            "correct": "true" if a.correct else "false",
        }
        for a in annotations
    ]
    return write_dataframe_csv(path, pd.DataFrame(rows, columns=list(ANNOTATION_COLUMNS)))


__all__ = ["HumanAnnotation", "ANNOTATION_COLUMNS", "load_annotations", "annotations_from_frame", "write_annotations"]
