"""Drive the voting policy over growing inputs until it attempts or runs out of input."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from adapters.ports import AdapterError, QaPort, QaRequest, checked_answers

from .prompt import DEFAULT_PROMPT_TEMPLATE, PromptTemplate, build_prompt
from .voting import DEFAULT_SAMPLES_PER_STEP, QaSampleSet, VoteState, record_failed_step, vote_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PolicyOutcome:
    attempted: bool
    answer: str | None
    step_index: int
    steps_taken: int
    failed_steps: int = 0


@dataclass(frozen=True, slots=True)
class StepResult:
    state: VoteState
    answer: str | None
    failed: bool = False
    error: str | None = None


def ask(
    state: VoteState,
    input_text: str,
    qa: QaPort,
    template: PromptTemplate = DEFAULT_PROMPT_TEMPLATE,
    *,
    clues: Sequence[str] | None = None,
) -> StepResult:
    """One policy step: prompt, sample, vote. A QA failure becomes a zero-tally step."""

    prompt = build_prompt(list(clues) if clues else [input_text], template)
    request = QaRequest(input_text=input_text, prompt=prompt, n_samples=state.samples_per_step)
    try:
        answers = checked_answers(qa, request)
    except AdapterError as exc:
        logger.warning("QA step %d failed, counting zero tallies: %s", state.steps_taken + 1, exc)
        return StepResult(record_failed_step(state), None, failed=True, error=str(exc))
    new_state, answer = vote_step(state, QaSampleSet(input_text=input_text, candidates=tuple(answers)))
    return StepResult(new_state, answer)


def run_policy(
    input_steps: Sequence[str],
    qa: QaPort,
    threshold: int,
    template: PromptTemplate = DEFAULT_PROMPT_TEMPLATE,
    *,
    samples_per_step: int = DEFAULT_SAMPLES_PER_STEP,
    step_clues: Sequence[Sequence[str]] | None = None,
) -> PolicyOutcome:
    """Each entry of ``input_steps`` is everything received so far; stop at the first attempt.

    ``step_clues``, when given, holds the clues heard by each step and numbers them in the prompt.
    """

    if not input_steps:
        raise ValueError("run_policy needs at least one input step")
    if step_clues is not None and len(step_clues) != len(input_steps):
        raise ValueError("step_clues must have one entry per input step")
    state = VoteState(threshold=threshold, samples_per_step=samples_per_step)
    failed = 0
    for step_number, input_text in enumerate(input_steps, start=1):
        clues = step_clues[step_number - 1] if step_clues is not None else None
        result = ask(state, input_text, qa, template, clues=clues)
        state = result.state
        failed += int(result.failed)
        if result.answer is not None:
            return PolicyOutcome(True, result.answer, step_number, state.steps_taken, failed)
    return PolicyOutcome(False, None, 0, state.steps_taken, failed)


__all__ = ["PolicyOutcome", "StepResult", "ask", "run_policy"]
