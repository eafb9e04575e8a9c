"""Prompt construction for generative QA backends."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class PromptTemplateError(ValueError):
    """Raised when a prompt template is incomplete."""


@dataclass(frozen=True, slots=True)
class PromptTemplate:
    role_preamble: str
    reasoning_instruction: str
    penalty_clause: str
    few_shot_example: tuple[str, str]
    output_format_instruction: str

    def __post_init__(self) -> None:
        parts = {
            "role_preamble": self.role_preamble,
            "reasoning_instruction": self.reasoning_instruction,
            "penalty_clause": self.penalty_clause,
            "few_shot_example.clues": self.few_shot_example[0] if len(self.few_shot_example) == 2 else "",
            "few_shot_example.answer": self.few_shot_example[1] if len(self.few_shot_example) == 2 else "",
            "output_format_instruction": self.output_format_instruction,
        }
        empty = [name for name, value in parts.items() if not str(value).strip()]
        if empty:
            raise PromptTemplateError(f"Prompt template parts must be nonempty: {', '.join(empty)}")
        object.__setattr__(self, "few_shot_example", tuple(self.few_shot_example))


DEFAULT_PROMPT_TEMPLATE = PromptTemplate(
    role_preamble=(
        "Take on the role of an expert, a science prodigy competing in a live science and maths "
        "quiz. You will be given the clues of a riddle read so far."
    ),
    reasoning_instruction="Reason through the clues one by one before settling on an answer.",
    penalty_clause=(
        "You will be penalized if your final answer is anything other than a short answer of "
        "one word or phrase."
    ),
    few_shot_example=(
        "(1) I am a property of a periodic propagating disturbance. (2) Therefore, I am a property "
        "of a wave. (3) I am only applicable to waves for which displacement is perpendicular to the "
        "direction of wave propagation.",
        "polarization",
    ),
    output_format_instruction='Respond with JSON only, in the form {"answer": "<short answer>"}.',
)


def format_clues(clues: Sequence[str]) -> str:
    return "\n".join(f"({number}) {clue.strip()}" for number, clue in enumerate(clues, start=1))


def build_prompt(clues: Sequence[str], template: PromptTemplate = DEFAULT_PROMPT_TEMPLATE) -> str:
    """Compose role, reasoning, penalty, worked example, numbered clues and output format, in that order."""

    if not clues or not any(clue.strip() for clue in clues):
        raise ValueError("build_prompt needs at least one clue")
    example_clues, example_answer = template.few_shot_example
    return "\n\n".join(
        (
            template.role_preamble.strip(),
            template.reasoning_instruction.strip(),
            template.penalty_clause.strip(),
            f"Example riddle:\n{example_clues.strip()}\nExample answer: {example_answer.strip()}",
            f"Clues:\n{format_clues(clues)}",
            template.output_format_instruction.strip(),
        )
    )


__all__ = ["PromptTemplateError", "PromptTemplate", "DEFAULT_PROMPT_TEMPLATE", "format_clues", "build_prompt"]
