"""Riddle dataset loading, validation and canonical serialization."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, Mapping, Sequence

import pandas as pd

from core.csv_json import read_csv_file
from core.storage import write_dataframe_csv
from core.validate import RowValidationError, require_columns

from .normalize import normalize_clue_text

logger = logging.getLogger(__name__)

MAX_CLUES = 9
MAX_ALT_ANSWERS = 4
CLUE_COLUMNS: tuple[str, ...] = tuple(f"Clue {i}" for i in range(1, MAX_CLUES + 1))
ALT_ANSWER_COLUMNS: tuple[str, ...] = tuple(f"Answer {i}" for i in range(1, MAX_ALT_ANSWERS + 1))
REQUIRED_COLUMNS: tuple[str, ...] = CLUE_COLUMNS + ("Answer",) + ALT_ANSWER_COLUMNS
CANONICAL_COLUMNS: tuple[str, ...] = ("Id", "Year", "Contest", "Subject") + REQUIRED_COLUMNS


class Subject(str, Enum):
    BIOLOGY = "biology"
    CHEMISTRY = "chemistry"
    PHYSICS = "physics"
    MATH = "math"

    @classmethod
    def parse(cls, value: str) -> "Subject":
        key = value.strip().lower()
        aliases = {"maths": "math", "mathematics": "math"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True, slots=True)
class Riddle:
    """One riddle: ordered clues, the ground-truth answer and its alternates."""

    id: str
    year: int
    contest: str
    subject: Subject | None
    clues: tuple[str, ...]
    answer: str
    alt_answers: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 1 <= len(self.clues) <= MAX_CLUES:
            raise ValueError(f"Riddle {self.id}: expected 1-{MAX_CLUES} clues, got {len(self.clues)}")
        if any(not clue.strip() for clue in self.clues):
            raise ValueError(f"Riddle {self.id}: clues must be nonempty")
        if not self.answer.strip():
            raise ValueError(f"Riddle {self.id}: answer must be nonempty")
        if len(self.alt_answers) > MAX_ALT_ANSWERS:
            raise ValueError(f"Riddle {self.id}: at most {MAX_ALT_ANSWERS} alternate answers")
        if any(not alt.strip() for alt in self.alt_answers):
            raise ValueError(f"Riddle {self.id}: alternate answers must be nonempty")
        if len(set(self.alt_answers)) != len(self.alt_answers):
            raise ValueError(f"Riddle {self.id}: alternate answers must be distinct")

    @property
    def truths(self) -> tuple[str, ...]:
        return (self.answer, *self.alt_answers)

    def clue_text(self, *, normalize: bool = False, upto: int | None = None) -> str:
        clues = self.clues if upto is None else self.clues[:upto]
        if normalize:
            clues = tuple(normalize_clue_text(clue) for clue in clues)
        return " ".join(clue.strip() for clue in clues)


@dataclass(frozen=True, slots=True)
class RiddleDataset:
    """Immutable, ordered collection of riddles with unique ids."""

    riddles: tuple[Riddle, ...]
    source_path: str = ""
    _index: Mapping[str, Riddle] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: Dict[str, Riddle] = {}
        for riddle in self.riddles:
            if riddle.id in index:
                raise ValueError(f"Duplicate riddle id '{riddle.id}' in dataset")
            index[riddle.id] = riddle
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.riddles)

    def __iter__(self) -> Iterator[Riddle]:
        return iter(self.riddles)

    def __contains__(self, riddle_id: object) -> bool:
        return riddle_id in self._index

    def get(self, riddle_id: str) -> Riddle:
        return self._index[riddle_id]

    def subset(self, riddle_ids: Iterable[str]) -> "RiddleDataset":
        """Keep the named riddles in dataset order; unknown ids raise ``ValueError``."""

        wanted = set(riddle_ids)
        unknown = sorted(wanted - set(self._index))
        if unknown:
            raise ValueError(f"Unknown riddle id(s): {', '.join(unknown)}")
        return RiddleDataset(tuple(r for r in self.riddles if r.id in wanted), self.source_path)


def _row_to_riddle(row: Mapping[str, str], *, line: int, year: int, source: str) -> Riddle:
    def cell(name: str) -> str:
        return str(row.get(name, "") or "").strip()

    clues: list[str] = []
    for column in CLUE_COLUMNS:
        value = cell(column)
        if not value:
            break
        clues.append(value)
    if not clues:
        raise RowValidationError(line, "'Clue 1' is empty", source)

    answer = cell("Answer")
    if not answer:
        raise RowValidationError(line, "'Answer' is empty", source)

    alt_answers = [cell(column) for column in ALT_ANSWER_COLUMNS if cell(column)]
    if len(set(alt_answers)) != len(alt_answers):
        raise RowValidationError(line, "alternate answers must be distinct", source)

    row_year = year
    if cell("Year"):
        try:
            row_year = int(float(cell("Year")))
        except ValueError as exc:
            raise RowValidationError(line, f"'Year' is not an integer: {cell('Year')!r}", source) from exc

    subject: Subject | None = None
    if cell("Subject"):
        try:
            subject = Subject.parse(cell("Subject"))
        except ValueError as exc:
            raise RowValidationError(line, f"unknown subject {cell('Subject')!r}", source) from exc

    riddle_id = cell("Id") or f"{row_year}-{line - 1:03d}"
    return Riddle(
        id=riddle_id,
        year=row_year,
        contest=cell("Contest"),
        subject=subject,
        clues=tuple(clues),
        answer=answer,
        alt_answers=tuple(alt_answers),
    )


def riddles_from_frame(df: pd.DataFrame, *, year: int, source: str = "") -> RiddleDataset:
    require_columns(df.columns, REQUIRED_COLUMNS, source=source or None)
    riddles: list[Riddle] = []
    seen: set[str] = set()
    # Header is line 1, so the first data row is line 2.
    for offset, row in enumerate(df.to_dict(orient="records")):
        line = offset + 2
        riddle = _row_to_riddle(row, line=line, year=year, source=source)
        if riddle.id in seen:
            raise RowValidationError(line, f"duplicate riddle id '{riddle.id}'", source)
        seen.add(riddle.id)
        riddles.append(riddle)
    return RiddleDataset(tuple(riddles), source)


def load_riddle_dataset(path: Path | str, year: int) -> RiddleDataset:
    """Load a riddle CSV (``Clue 1``..``Clue 9``, ``Answer``, ``Answer 1``..``Answer 4``)."""

    df = read_csv_file(path)
    dataset = riddles_from_frame(df, year=year, source=str(path))
    logger.info("Loaded %d riddles from %s", len(dataset), path)
    return dataset


def dataset_to_frame(dataset: RiddleDataset | Sequence[Riddle]) -> pd.DataFrame:
    rows = []
    for riddle in dataset:
        row = {
            "Id": riddle.id,
            "Year": str(riddle.year),
            "Contest": riddle.contest,
            "Subject": riddle.subject.value if riddle.subject else "",
        }
        for index, column in enumerate(CLUE_COLUMNS):
            row[column] = riddle.clues[index] if index < len(riddle.clues) else ""
        row["Answer"] = riddle.answer
        for index, column in enumerate(ALT_ANSWER_COLUMNS):
            row[column] = riddle.alt_answers[index] if index < len(riddle.alt_answers) else ""
        rows.append(row)
    return pd.DataFrame(rows, columns=list(CANONICAL_COLUMNS))


def write_riddle_dataset(dataset: RiddleDataset | Sequence[Riddle], path: Path | str) -> Path:
    """Write the canonical riddle CSV understood by :func:`load_riddle_dataset`."""

    return write_dataframe_csv(path, dataset_to_frame(dataset))


__all__ = [
    "Subject",
    "Riddle",
    "RiddleDataset",
    "CLUE_COLUMNS",
    "ALT_ANSWER_COLUMNS",
    "REQUIRED_COLUMNS",
    "CANONICAL_COLUMNS",
    "load_riddle_dataset",
    "riddles_from_frame",
    "dataset_to_frame",
    "write_riddle_dataset",
]
