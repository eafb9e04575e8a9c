"""Deterministic in-process adapters for replays, tests and offline evaluation."""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from riddles.dataset import Riddle, RiddleDataset
from riddles.normalize import normalize_tokens
from segmentation.detector import contains_phrase
from segmentation.events import TimedSegment

from .ports import AdapterError, QaRequest, Transcript, Utterance

UNKNOWN_ANSWER = "unknown"

# Plausible mishearings used for random word substitution.
_CONFUSIONS: tuple[str, ...] = ("test", "the", "wave", "right", "a", "and", "price", "riddled", "clue", "do")


def _digest(text: str, size: int = 8) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:size]


class RiddleLocator:
    """Find which riddle an accumulated input belongs to, and how far into it the input reaches."""

    def __init__(self, dataset: RiddleDataset | Sequence[Riddle]) -> None:
        self._riddles = list(dataset)
        self._flat: list[list[str]] = []
        self._clue_of_word: list[list[int]] = []
        self._clue_tokens: list[list[list[str]]] = []
        for riddle in self._riddles:
            flat: list[str] = []
            owners: list[int] = []
            per_clue: list[list[str]] = []
            for number, clue in enumerate(riddle.clues, start=1):
                tokens = normalize_tokens(clue)
                per_clue.append(tokens)
                flat.extend(tokens)
                owners.extend([number] * len(tokens))
            self._flat.append(flat)
            self._clue_of_word.append(owners)
            self._clue_tokens.append(per_clue)

    def locate(self, input_text: str) -> tuple[Riddle | None, int]:
        tokens = normalize_tokens(input_text)
        if not tokens:
            return None, 0
        for position, flat in enumerate(self._flat):
            if len(tokens) <= len(flat) and flat[: len(tokens)] == tokens:
                return self._riddles[position], self._clue_of_word[position][len(tokens) - 1]

        wanted = set(tokens)
        best, best_score = -1, 0
        for position, flat in enumerate(self._flat):
            score = len(wanted & set(flat))
            if score > best_score:
                best, best_score = position, score
        if best < 0:
            return None, 0
        reached = 0
        for number, clue_tokens in enumerate(self._clue_tokens[best], start=1):
            if clue_tokens and contains_phrase(tokens, " ".join(clue_tokens)):
                reached = number
        return self._riddles[best], reached


class RiddleAwareQa:
    """Base for mock QA backends that answer from the ground truth of the located riddle."""

    concurrent_safe = True

    def __init__(self, dataset: RiddleDataset | Sequence[Riddle], *, latency_s: float = 0.0) -> None:
        self.locator = RiddleLocator(dataset)
        self.latency_s = latency_s

    def generate(self, request: QaRequest) -> list[str]:
        riddle, reached = self.locator.locate(request.input_text)
        return list(self.answers(riddle, reached, request))

    def answers(self, riddle: Riddle | None, reached: int, request: QaRequest) -> Sequence[str]:
        raise NotImplementedError


class OracleQa(RiddleAwareQa):
    """Always answers with the ground truth."""

    def answers(self, riddle: Riddle | None, reached: int, request: QaRequest) -> Sequence[str]:
        answer = riddle.answer if riddle else UNKNOWN_ANSWER
        return [answer] * request.n_samples


class OracleAfterClueQa(RiddleAwareQa):
    """Answers correctly once clue ``from_clue`` has been read, a fixed wrong answer before that."""

    def __init__(
        self,
        dataset: RiddleDataset | Sequence[Riddle],
        *,
        from_clue: int = 3,
        wrong_answer: str = UNKNOWN_ANSWER,
        latency_s: float = 0.0,
    ) -> None:
        super().__init__(dataset, latency_s=latency_s)
        if from_clue < 1:
            raise ValueError("from_clue must be >= 1")
        self.from_clue = from_clue
        self.wrong_answer = wrong_answer

    def answers(self, riddle: Riddle | None, reached: int, request: QaRequest) -> Sequence[str]:
        if riddle is not None and reached >= self.from_clue:
            return [riddle.answer] * request.n_samples
        return [self.wrong_answer] * request.n_samples


class ScriptedQa(RiddleAwareQa):
    """Delegates to ``script(riddle, clue_reached, request)``."""

    def __init__(
        self,
        dataset: RiddleDataset | Sequence[Riddle],
        script: Callable[[Riddle | None, int, QaRequest], Sequence[str]],
        *,
        latency_s: float = 0.0,
    ) -> None:
        super().__init__(dataset, latency_s=latency_s)
        self.script = script

    def answers(self, riddle: Riddle | None, reached: int, request: QaRequest) -> Sequence[str]:
        return self.script(riddle, reached, request)


class ConstantQa:
    concurrent_safe = True

    def __init__(self, answer: str = UNKNOWN_ANSWER, *, latency_s: float = 0.0) -> None:
        self.answer = answer
        self.latency_s = latency_s

    def generate(self, request: QaRequest) -> list[str]:
        return [self.answer] * request.n_samples


class ScatterQa:
    """A fresh, distinct answer for every sample of every distinct input."""

    concurrent_safe = True

    def __init__(self, *, latency_s: float = 0.0) -> None:
        self.latency_s = latency_s

    def generate(self, request: QaRequest) -> list[str]:
        key = _digest(request.input_text)
        return [f"guess {key} {index}" for index in range(request.n_samples)]


class FailingQa:
    """Raises :class:`AdapterError` when ``fail_when(request)`` holds, otherwise delegates."""

    def __init__(self, inner: object | None = None, fail_when: Callable[[QaRequest], bool] | None = None) -> None:
        self.inner = inner
        self.fail_when = fail_when
        self.concurrent_safe = getattr(inner, "concurrent_safe", True)
        self.latency_s = getattr(inner, "latency_s", 0.0)

    def generate(self, request: QaRequest) -> list[str]:
        if self.inner is None or self.fail_when is None or self.fail_when(request):
            raise AdapterError("injected QA failure", port="qa")
        return self.inner.generate(request)  # type: ignore[attr-defined]


@dataclass(frozen=True, slots=True)
class PhraseRewrite:
    source: str
    target: str

    def apply(self, text: str) -> str:
        pattern = re.compile(r"\b" + re.escape(self.source) + r"\b", flags=re.IGNORECASE)
        return pattern.sub(self.target, text)


class ReplayStt:
    """Replays annotated transcript chunks, optionally corrupting them.

    Word substitutions are drawn from a generator seeded by ``(seed, chunk.seq)`` so
    the output does not depend on call order or threading.
    """

    concurrent_safe = True

    def __init__(
        self,
        *,
        substitution_rate: float = 0.0,
        seed: int = 0,
        rewrites: Iterable[PhraseRewrite] = (),
        latency_s: float = 0.94,
        fail_seqs: Iterable[int] = (),
    ) -> None:
        if not 0.0 <= substitution_rate <= 1.0:
            raise ValueError("substitution_rate must be within [0, 1]")
        self.substitution_rate = substitution_rate
        self.seed = seed
        self.rewrites = tuple(rewrites)
        self.latency_s = latency_s
        self.fail_seqs = frozenset(fail_seqs)

    def transcribe(self, chunk: TimedSegment) -> Transcript:
        if chunk.seq in self.fail_seqs:
            raise AdapterError(f"injected STT failure on chunk {chunk.seq}", port="stt")
        text = chunk.text
        for rewrite in self.rewrites:
            text = rewrite.apply(text)
        if self.substitution_rate > 0 and text:
            rng = np.random.default_rng([self.seed, chunk.seq])
            words = text.split()
            for index in range(len(words)):
                if rng.random() < self.substitution_rate:
                    words[index] = _CONFUSIONS[int(rng.integers(len(_CONFUSIONS)))]
            text = " ".join(words)
        return Transcript(text=text, latency_s=self.latency_s)


class StubTts:
    """Returns a synthetic audio handle after a fixed reported latency."""

    concurrent_safe = True

    def __init__(self, *, latency_s: float = 1.05) -> None:
        self.latency_s = latency_s
        self.spoken: list[str] = []

    def synthesize(self, text: str) -> Utterance:
        self.spoken.append(text)
        return Utterance(handle=f"tts://{_digest(text, 12)}", latency_s=self.latency_s)


__all__ = [
    "UNKNOWN_ANSWER",
    "RiddleLocator",
    "RiddleAwareQa",
    "OracleQa",
    "OracleAfterClueQa",
    "ScriptedQa",
    "ConstantQa",
    "ScatterQa",
    "FailingQa",
    "PhraseRewrite",
    "ReplayStt",
    "StubTts",
]
