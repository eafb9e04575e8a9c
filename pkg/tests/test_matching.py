from __future__ import annotations

import random

import pytest

from riddles.dataset import Riddle, RiddleDataset
from scoring.matching import MatchResult, exact_match, fuzzy_match, match_answer
from scoring.report import (
    AggregationError,
    AttemptRecord,
    EvalReport,
    ScoringError,
    aggregate_report,
    points_for_clue,
)
from scoring.wer import MetricError, word_edit_counts, word_error_rate


def _riddle(answer: str, *alts: str, riddle_id: str = "r1") -> Riddle:
    return Riddle(id=riddle_id, year=2019, contest="", subject=None, clues=("i am",), answer=answer, alt_answers=alts)


def test_fuzzy_match_on_plural():
    riddle = _riddle("tissue")
    assert fuzzy_match("tissues", riddle)
    assert not exact_match("tissues", riddle)
    assert match_answer("tissues", riddle) == MatchResult(em=False, fm=True, matched_truth="tissue")


@pytest.mark.parametrize(
    "candidate,truth,em,fm",
    [
        ("The Polarization.", "polarization", True, True),
        ("polarisation", "polarization", False, False),
        ("sodium chloride crystal", "sodium chloride", False, True),
        ("", "wave", False, False),
        ("the", "the", False, False),
    ],
)
def test_match_table(candidate, truth, em, fm):
    result = match_answer(candidate, _riddle(truth))
    assert (result.em, result.fm) == (em, fm)


def test_alternate_answers_count():
    riddle = _riddle("polarization", "polarisation")
    result = match_answer("Polarisation", riddle)
    assert result.em and result.matched_truth == "polarisation"


def test_exact_match_implies_fuzzy_match():
    rng = random.Random(11)
    words = ["wave", "ion", "the", "acid", "base", "an"]
    for _ in range(500):
        truth = " ".join(rng.choice(words) for _ in range(rng.randint(1, 3)))
        candidate = " ".join(rng.choice(words) for _ in range(rng.randint(0, 4)))
        if not truth.strip():
            continue
        result = match_answer(candidate, _riddle(truth))
        assert not result.em or result.fm


def test_match_result_refuses_em_without_fm():
    with pytest.raises(ValueError):
        MatchResult(em=True, fm=False)


def test_points_table():
    assert [points_for_clue(n) for n in range(1, 10)] == [5, 4, 3, 3, 3, 3, 3, 3, 3]
    with pytest.raises(ScoringError):
        points_for_clue(0)


def _brute_force_distance(ref: list[str], hyp: list[str]) -> int:
    """Exhaustive search over edit scripts without memoization."""

    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    keep = _brute_force_distance(ref[1:], hyp[1:]) + (0 if ref[0] == hyp[0] else 1)
    delete = _brute_force_distance(ref[1:], hyp) + 1
    insert = _brute_force_distance(ref, hyp[1:]) + 1
    return min(keep, delete, insert)


def test_wer_matches_brute_force():
    rng = random.Random(2024)
    vocab = ["first", "riddle", "test", "clue", "wave"]
    for _ in range(400):
        ref = [rng.choice(vocab) for _ in range(rng.randint(1, 5))]
        hyp = [rng.choice(vocab) for _ in range(rng.randint(0, 5))]
        expected = _brute_force_distance(ref, hyp) / len(ref)
        assert word_error_rate(" ".join(ref), " ".join(hyp)) == pytest.approx(expected)
        counts = word_edit_counts(" ".join(ref), " ".join(hyp))
        assert counts.total == _brute_force_distance(ref, hyp)


def test_wer_examples():
    assert word_error_rate("first riddle", "test riddle") == 0.5
    assert word_error_rate("a b c", "a b c") == 0.0
    assert word_error_rate("a b", "") == 1.0
    assert word_edit_counts("a b", "a x b").insertions == 1
    with pytest.raises(MetricError):
        word_error_rate("", "anything")


def test_attempt_record_invariants():
    riddle = _riddle("tissue")
    with pytest.raises(ValueError):
        AttemptRecord(riddle_id="r1", attempted=False, answer="tissue")
    with pytest.raises(ValueError):
        AttemptRecord(riddle_id="r1", attempted=True, answer="x", points=5)
    scored = AttemptRecord.scored(riddle, "Tissue", step_index=2, clue_number=2)
    assert scored.points == 4 and scored.match.em
    wrong = AttemptRecord.scored(riddle, "organ", step_index=1, clue_number=1)
    assert wrong.points == 0 and not wrong.match.fm
    assert AttemptRecord.from_dict(scored.to_dict()) == scored


def _dataset(n: int) -> RiddleDataset:
    return RiddleDataset(tuple(_riddle(f"answer {i}", riddle_id=f"r{i}") for i in range(n)))


def test_aggregate_fills_and_orders():
    dataset = _dataset(4)
    records = [AttemptRecord.scored(dataset.get("r2"), "answer 2", step_index=1, clue_number=1)]
    report = aggregate_report(records, dataset)
    assert [r.riddle_id for r in report.records] == ["r0", "r1", "r2", "r3"]
    assert report.n_riddles == 4
    assert report.n_attempted == 1
    assert report.em_pct == 25.0
    assert report.total_points == 5


def test_aggregate_rejects_unknown_and_duplicates():
    dataset = _dataset(2)
    record = AttemptRecord.unattempted(dataset.get("r0"))
    with pytest.raises(AggregationError):
        aggregate_report([record, record], dataset)
    with pytest.raises(AggregationError):
        aggregate_report([AttemptRecord(riddle_id="zz", attempted=False)], dataset)


def test_empty_report_has_zero_percentages():
    report = EvalReport(records=())
    assert report.n_riddles == 0
    assert report.em_pct == 0.0
    assert report.fm_pct == 0.0
