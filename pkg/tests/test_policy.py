from __future__ import annotations

import random

import pytest

from adapters.mocks import ConstantQa, FailingQa, ScatterQa
from adapters.ports import QaRequest
from policy.prompt import DEFAULT_PROMPT_TEMPLATE, PromptTemplate, PromptTemplateError, build_prompt, format_clues
from policy.runner import run_policy
from policy.voting import PolicyStateError, QaSampleSet, VoteState, record_failed_step, top_answers, vote_step
from riddles.normalize import normalize_answer


def test_prompt_has_parts_in_order():
    prompt = build_prompt(["I am a wave", "I am transverse"])
    order = [
        DEFAULT_PROMPT_TEMPLATE.role_preamble,
        DEFAULT_PROMPT_TEMPLATE.reasoning_instruction,
        DEFAULT_PROMPT_TEMPLATE.penalty_clause,
        DEFAULT_PROMPT_TEMPLATE.few_shot_example[1],
        "(1) I am a wave\n(2) I am transverse",
        DEFAULT_PROMPT_TEMPLATE.output_format_instruction,
    ]
    positions = [prompt.index(part) for part in order]
    assert positions == sorted(positions)
    assert "science prodigy" in prompt


def test_prompt_errors():
    with pytest.raises(ValueError):
        build_prompt([])
    with pytest.raises(PromptTemplateError):
        PromptTemplate("", "reason", "penalty", ("clues", "answer"), "json")
    assert format_clues([" a ", "b"]) == "(1) a\n(2) b"


def test_vote_step_attempts_when_threshold_reached():
    state = VoteState(threshold=3)
    state, answer = vote_step(state, QaSampleSet("x", ("Wave", "wave", "ion")))
    assert answer is None
    state, answer = vote_step(state, QaSampleSet("x y", ("ion", "The wave", "base")))
    assert answer == "The wave"
    assert state.attempted and state.steps_taken == 2
    with pytest.raises(PolicyStateError):
        vote_step(state, QaSampleSet("x y z", ("a", "b", "c")))


def test_vote_step_requires_k_candidates():
    with pytest.raises(ValueError):
        vote_step(VoteState(), QaSampleSet("x", ("one",)))


def test_threshold_one_attempts_immediately():
    _, answer = vote_step(VoteState(threshold=1), QaSampleSet("x", ("ion", "wave", "wave")))
    assert answer == "wave"


def test_failed_steps_add_no_tallies():
    state = record_failed_step(VoteState())
    assert state.steps_taken == 1 and dict(state.tallies) == {}
    state, _ = vote_step(state, QaSampleSet("x", ("ion", "ion", "wave")))
    assert top_answers(state) == [("ion", 2), ("wave", 1)]


class ListQa:
    """Returns scripted samples, one list per call."""

    concurrent_safe = False
    latency_s = 0.0

    def __init__(self, steps):
        self.steps = list(steps)
        self.calls = 0

    def generate(self, request: QaRequest) -> list[str]:
        samples = self.steps[self.calls]
        self.calls += 1
        return list(samples)


def _oracle(script, threshold):
    """Independent tally simulator: (1-based attempt step, raw answer) or (0, None)."""

    tallies: dict[str, int] = {}
    first: dict[str, int] = {}
    ordinal = 0
    for step, samples in enumerate(script, start=1):
        raw_first: dict[str, str] = {}
        for sample in samples:
            ordinal += 1
            key = normalize_answer(sample)
            if not key:
                continue
            tallies[key] = tallies.get(key, 0) + 1
            first.setdefault(key, ordinal)
            raw_first.setdefault(key, sample)
        best = None
        for key, count in tallies.items():
            if count < threshold:
                continue
            if best is None or count > tallies[best] or (count == tallies[best] and first[key] < first[best]):
                best = key
        if best is not None:
            return step, raw_first[best]
    return 0, None


def test_run_policy_matches_brute_force_tally():
    alphabet = ["Osmosis", "osmosis", "tissue", "Ion", "wave", "prism", "the"]
    for seed in range(1000):
        rng = random.Random(seed)
        size = rng.randint(1, 5)
        letters = alphabet[:size] if size < 5 else alphabet
        threshold = rng.randint(1, 6)
        n_steps = rng.randint(1, 9)
        script = [[rng.choice(letters) for _ in range(3)] for _ in range(n_steps)]
        outcome = run_policy([f"step {i}" for i in range(n_steps)], ListQa(script), threshold)
        expected_step, expected_answer = _oracle(script, threshold)
        assert outcome.step_index == expected_step, (seed, script, threshold)
        assert outcome.answer == expected_answer
        assert outcome.attempted is (expected_step > 0)


def test_run_policy_with_scatter_never_attempts():
    outcome = run_policy(["a", "a b", "a b c"], ScatterQa(), threshold=2)
    assert not outcome.attempted and outcome.step_index == 0 and outcome.steps_taken == 3


def test_run_policy_survives_qa_failures():
    qa = FailingQa(ConstantQa("wave"), fail_when=lambda request: request.input_text == "one")
    outcome = run_policy(["one", "one two"], qa, threshold=3)
    assert outcome.attempted and outcome.step_index == 2 and outcome.failed_steps == 1


def test_run_policy_needs_input():
    with pytest.raises(ValueError):
        run_policy([], ConstantQa(), threshold=3)


def test_run_policy_step_clues_match_steps():
    with pytest.raises(ValueError):
        run_policy(["a", "a b"], ConstantQa(), threshold=3, step_clues=[["a"]])
    outcome = run_policy(["a", "a b"], ConstantQa("x"), threshold=3, step_clues=[["a"], ["a", "b"]])
    assert outcome.attempted and outcome.step_index == 1
