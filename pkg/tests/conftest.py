from __future__ import annotations

from pathlib import Path

import pytest

from riddles.dataset import ALT_ANSWER_COLUMNS, CLUE_COLUMNS, Riddle, RiddleDataset, Subject

HEADER = list(CLUE_COLUMNS) + ["Answer"] + list(ALT_ANSWER_COLUMNS)


def write_riddle_csv(path: Path, rows: list[dict[str, str]], extra_columns: tuple[str, ...] = ()) -> Path:
    """Write a riddle CSV with every required column; missing cells are left blank."""

    columns = list(extra_columns) + HEADER
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_quote(row.get(column, "")) for column in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _quote(value: str) -> str:
    if any(ch in value for ch in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


@pytest.fixture
def wave_riddle() -> Riddle:
    return Riddle(
        id="2019-001",
        year=2019,
        contest="1/8 final",
        subject=Subject.PHYSICS,
        clues=(
            "I am a property of a periodic propagating disturbance.",
            "Therefore, I am a property of a wave.",
            "I am only applicable to waves for which displacement is perpendicular to the direction of wave propagation.",
        ),
        answer="polarization",
        alt_answers=("polarisation",),
    )


@pytest.fixture
def small_dataset(wave_riddle: Riddle) -> RiddleDataset:
    tissue = Riddle(
        id="2019-002",
        year=2019,
        contest="1/8 final",
        subject=Subject.BIOLOGY,
        clues=("I am a group of cells.", "My cells share a function.", "I am found in organs."),
        answer="tissue",
    )
    return RiddleDataset((wave_riddle, tissue), source_path="memory")
