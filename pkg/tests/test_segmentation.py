from __future__ import annotations

import random

import pytest

from segmentation.classifier import (
    ClassifierError,
    ClueLabel,
    classify_segment,
    resolve_classifier,
    rule_baseline_classifier,
)
from segmentation.detector import DetectorConfig, contains_phrase, detect_riddle_end, detect_riddle_start
from segmentation.events import EventKind, TimedSegment, events_to_jsonl
from segmentation.session import Phase, SequenceError, SessionState, advance, finish, segment_stream

STRICT = DetectorConfig()
LENIENT = DetectorConfig(lenient_keyword=True)


def _seg(text: str, seq: int) -> TimedSegment:
    return TimedSegment(text=text, start_s=5.0 * (seq - 1), end_s=5.0 * seq, seq=seq)


@pytest.mark.parametrize(
    "text,config,expected",
    [
        ("We begin with the first riddle.", STRICT, True),
        ("Second riddle!", STRICT, True),
        ("test riddle", STRICT, False),
        ("test riddle", LENIENT, True),
        ("riddles are fun", LENIENT, False),
        ("the firstriddle", STRICT, False),
    ],
)
def test_detect_riddle_start(text, config, expected):
    assert detect_riddle_start(text, config) is expected


def test_detect_riddle_end():
    assert detect_riddle_end("And the answer is polarization", STRICT)
    assert not detect_riddle_end("i am the answer", STRICT)


def test_contains_phrase_is_contiguous():
    assert contains_phrase(["we", "begin", "now"], "We begin")
    assert not contains_phrase(["we", "now", "begin"], "we begin")
    assert not contains_phrase(["we"], "")


def test_rule_baseline_classifier():
    assert rule_baseline_classifier("I am a property of a wave") is ClueLabel.CLUE
    assert rule_baseline_classifier("Five points to the school") is ClueLabel.NON_CLUE
    assert rule_baseline_classifier("Please be quiet") is ClueLabel.NON_CLUE
    with pytest.raises(ValueError):
        rule_baseline_classifier("   ")


def test_classifier_port_failures_become_stage_errors():
    class Broken:
        concurrent_safe = True

        def classify(self, text):
            raise RuntimeError("model offline")

    segment = _seg("i am here", 1)
    with pytest.raises(ClassifierError) as excinfo:
        classify_segment(segment.text, Broken(), segment=segment)
    assert excinfo.value.segment is segment
    with pytest.raises(ValueError):
        resolve_classifier("does-not-exist")


def test_start_clue_end_sequence():
    events = segment_stream(
        [
            _seg("first riddle", 1),
            _seg("I am a property of a periodic propagating disturbance", 2),
            _seg("Ten points to the school", 3),
            _seg("Therefore I am a property of a wave", 4),
            _seg("the answer is polarization", 5),
        ],
        STRICT,
    )
    assert [e.kind for e in events] == [
        EventKind.RIDDLE_STARTED,
        EventKind.CLUE,
        EventKind.NON_CLUE,
        EventKind.CLUE,
        EventKind.RIDDLE_ENDED,
    ]
    assert [e.clue_number for e in events if e.kind is EventKind.CLUE] == [1, 2]


def test_idle_ignores_clue_like_text():
    state, events = advance(SessionState(), _seg("i am a property of a wave", 1), STRICT)
    assert events == []
    assert state.phase is Phase.IDLE


def test_corrupted_announcement_loses_the_riddle():
    segments = [_seg("test riddle", 1), _seg("i am a wave", 2), _seg("i am a property", 3)]
    assert segment_stream(segments, STRICT) == []
    lenient = segment_stream(segments, LENIENT)
    assert [e.kind for e in lenient][:3] == [EventKind.RIDDLE_STARTED, EventKind.CLUE, EventKind.CLUE]


def test_new_start_while_active_ends_previous():
    state = SessionState()
    state, _ = advance(state, _seg("first riddle", 1), STRICT)
    state, _ = advance(state, _seg("i am one", 2), STRICT)
    before = state
    state, events = advance(state, _seg("second riddle", 3), STRICT)
    assert [e.kind for e in events] == [EventKind.RIDDLE_ENDED, EventKind.RIDDLE_STARTED]
    assert events[0].riddle_index == 1 and events[1].riddle_index == 2
    assert state.clues == ()
    assert before.clues == ("i am one",)


def test_blank_segment_and_sequence_errors():
    state, events = advance(SessionState(), _seg("   ", 1), STRICT)
    assert events == [] and state.last_seq == 1
    with pytest.raises(SequenceError):
        advance(state, _seg("first riddle", 1), STRICT)


def test_finish_closes_active_riddle():
    state, _ = advance(SessionState(), _seg("first riddle", 1), STRICT)
    state, events = finish(state)
    assert [e.kind for e in events] == [EventKind.RIDDLE_ENDED]
    assert finish(state) == (state, [])


_POOL = (
    "first riddle",
    "next riddle",
    "we begin",
    "that is the end of the riddle",
    "i am a wave",
    "my colour is red",
    "i was found in 1900",
    "ten points to the school",
    "hello everyone",
    "",
    "test riddle",
)


def test_random_streams_keep_clues_contiguous_and_replay_identically():
    for seed in range(200):
        rng = random.Random(seed)
        config = LENIENT if seed % 2 else STRICT
        segments = [_seg(rng.choice(_POOL), seq) for seq in range(1, rng.randint(1, 30) + 1)]
        events = segment_stream(segments, config)
        assert events_to_jsonl(events) == events_to_jsonl(segment_stream(segments, config))

        active = False
        expected_clue = 1
        last_index = 0
        for event in events:
            if event.kind is EventKind.RIDDLE_STARTED:
                assert not active
                assert event.riddle_index == last_index + 1
                last_index = event.riddle_index
                active, expected_clue = True, 1
            elif event.kind is EventKind.RIDDLE_ENDED:
                assert active
                active = False
            else:
                assert active, "clue events only inside a riddle"
                if event.kind is EventKind.CLUE:
                    assert event.clue_number == expected_clue
                    expected_clue += 1
        assert not active
