"""Port contracts for the four external capabilities: STT, clue classification, QA and TTS."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Protocol, runtime_checkable

from segmentation.classifier import ClueClassifier
from segmentation.events import TimedSegment


class AdapterError(RuntimeError):
    """Raised by an adapter when its backend fails for one call."""

    def __init__(self, message: str, *, port: str = "") -> None:
        super().__init__(message)
        self.port = port


@dataclass(frozen=True, slots=True)
class Transcript:
    text: str
    latency_s: float = 0.0


@dataclass(frozen=True, slots=True)
class QaRequest:
    input_text: str
    prompt: str
    n_samples: int

    def to_wire(self) -> Dict[str, Any]:
        return {"input_text": self.input_text, "prompt": self.prompt, "n_samples": self.n_samples}


@dataclass(frozen=True, slots=True)
class Utterance:
    handle: str
    latency_s: float = 0.0


@runtime_checkable
class SttPort(Protocol):
    """Consumes an opaque chunk handle and returns timed text."""

    concurrent_safe: bool

    def transcribe(self, chunk: TimedSegment) -> Transcript: ...


@runtime_checkable
class QaPort(Protocol):
    """Returns exactly ``request.n_samples`` answer strings for one input."""

    concurrent_safe: bool
    latency_s: float

    def generate(self, request: QaRequest) -> list[str]: ...


@runtime_checkable
class TtsPort(Protocol):
    concurrent_safe: bool

    def synthesize(self, text: str) -> Utterance: ...


@dataclass(frozen=True, slots=True)
class AdapterSuite:
    stt: SttPort
    classifier: ClueClassifier
    qa: QaPort
    tts: TtsPort

    def __post_init__(self) -> None:
        missing = [name for name in ("stt", "classifier", "qa", "tts") if getattr(self, name) is None]
        if missing:
            raise ValueError(f"AdapterSuite is missing port(s): {', '.join(missing)}")


def checked_answers(port: QaPort, request: QaRequest) -> list[str]:
    """Call a QA port and enforce the k-answers contract."""

    try:
        answers = port.generate(request)
    except AdapterError:
        raise
    except Exception as exc:
        raise AdapterError(f"QA backend failed: {exc}", port="qa") from exc
    if not isinstance(answers, list) or len(answers) != request.n_samples:
        raise AdapterError(
            f"QA backend returned {len(answers) if isinstance(answers, list) else type(answers).__name__} "
            f"answers, expected {request.n_samples}",
            port="qa",
        )
    return [str(answer) for answer in answers]


__all__ = [
    "AdapterError",
    "Transcript",
    "QaRequest",
    "Utterance",
    "SttPort",
    "QaPort",
    "TtsPort",
    "AdapterSuite",
    "checked_answers",
]
