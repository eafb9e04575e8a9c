"""Synthetic riddles and annotations.

Everything produced here is labeled synthetic. The real contest files and the
human annotations are not public; these generators only exist so the harness
arithmetic can be validated against the published human percentages.
"""
from __future__ import annotations

import numpy as np

from .annotations import HumanAnnotation
from .dataset import Riddle, RiddleDataset, Subject

SYNTHETIC_CONTEST = "synthetic"

_ANSWER_BANK: dict[Subject, tuple[str, ...]] = {
    Subject.BIOLOGY: ("osmosis", "tissue", "chlorophyll", "enzyme", "mitochondrion", "pollination"),
    Subject.CHEMISTRY: ("hydrogen", "catalyst", "isotope", "electrolysis", "ester", "titration"),
    Subject.PHYSICS: ("polarization", "inertia", "refraction", "resonance", "capacitance", "diffraction"),
    Subject.MATH: ("hypotenuse", "prime number", "derivative", "matrix", "parabola", "median"),
}

_DESCRIPTORS: tuple[str, ...] = (
    "often discussed in the classroom",
    "described in most textbooks",
    "related to a measurable quantity",
    "studied in senior secondary science",
    "named after a careful observation",
    "linked to a well known experiment",
    "used to explain everyday phenomena",
    "easy to confuse with a neighbour",
    "the final piece of this puzzle",
)

_SUBJECT_ORDER: tuple[Subject, ...] = (Subject.BIOLOGY, Subject.CHEMISTRY, Subject.PHYSICS, Subject.MATH)


def synthetic_dataset(n: int, *, year: int = 2019, seed: int = 0, min_clues: int = 3, max_clues: int = 6) -> RiddleDataset:
    """Generate ``n`` first-person riddles; the item number makes every clue prefix unique."""

    rng = np.random.default_rng([seed, year])
    riddles: list[Riddle] = []
    for index in range(1, n + 1):
        subject = _SUBJECT_ORDER[(index - 1) % len(_SUBJECT_ORDER)]
        bank = _ANSWER_BANK[subject]
        answer = bank[int(rng.integers(len(bank)))]
        n_clues = int(rng.integers(min_clues, max_clues + 1))
        clues = tuple(
            f"i am item {index} clue {clue_number} and {_DESCRIPTORS[(clue_number - 1) % len(_DESCRIPTORS)]}"
            for clue_number in range(1, n_clues + 1)
        )
        riddles.append(
            Riddle(
                id=f"syn-{year}-{index:03d}",
                year=year,
                contest=f"{SYNTHETIC_CONTEST}-{(index - 1) // 4 + 1}",
                subject=subject,
                clues=clues,
                answer=answer,
            )
        )
    return RiddleDataset(tuple(riddles), source_path=f"synthetic://{year}/{seed}")


def synthetic_annotations(
    dataset: RiddleDataset,
    correct: int,
    *,
    seed: int = 0,
    wrong_rate: float = 0.5,
) -> list[HumanAnnotation]:
    """Annotate every riddle, with exactly ``correct`` answered correctly."""

    if not 0 <= correct <= len(dataset):
        raise ValueError(f"correct must be within [0, {len(dataset)}], got {correct}")
    rng = np.random.default_rng(seed)
    correct_positions = set(int(i) for i in rng.choice(len(dataset), size=correct, replace=False))
    annotations: list[HumanAnnotation] = []
    for position, riddle in enumerate(dataset):
        clue_number = int(rng.integers(1, len(riddle.clues) + 1))
        if position in correct_positions:
            annotations.append(HumanAnnotation(riddle.id, True, clue_number, True))
        elif rng.random() < wrong_rate:
            annotations.append(HumanAnnotation(riddle.id, True, clue_number, False))
        else:
            annotations.append(HumanAnnotation(riddle.id, False, None, False))
    return annotations


__all__ = ["synthetic_dataset", "synthetic_annotations", "SYNTHETIC_CONTEST"]
