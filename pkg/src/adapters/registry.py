"""Named QA backends selectable from config files and the command line."""
from __future__ import annotations

from typing import Callable, Dict, Optional

from core.config import AppConfig
from core.validate import ConfigError
from riddles.dataset import RiddleDataset

from .mocks import ConstantQa, OracleAfterClueQa, OracleQa, ScatterQa
from .ports import QaPort
from .remote import HttpQaBackend, StdioQaBackend

QA_BACKENDS: tuple[str, ...] = ("oracle", "oracle-after-clue", "constant", "scatter", "http", "stdio")


def build_qa_backend(
    name: str,
    *,
    dataset: RiddleDataset | None = None,
    from_clue: int = 3,
    constant_answer: str = "unknown",
    latency_s: float = 0.0,
    config: Optional[AppConfig] = None,
) -> QaPort:
    def needs_dataset() -> RiddleDataset:
        if dataset is None:
            raise ConfigError(f"QA backend '{name}' needs a dataset")
        return dataset

    factories: Dict[str, Callable[[], QaPort]] = {
        "oracle": lambda: OracleQa(needs_dataset(), latency_s=latency_s),
        "oracle-after-clue": lambda: OracleAfterClueQa(
            needs_dataset(), from_clue=from_clue, wrong_answer=constant_answer, latency_s=latency_s
        ),
        "constant": lambda: ConstantQa(constant_answer, latency_s=latency_s),
        "scatter": lambda: ScatterQa(latency_s=latency_s),
        "http": lambda: HttpQaBackend(config=config),
        "stdio": lambda: StdioQaBackend(config=config),
    }
    key = name.strip().lower().replace("_", "-")
    if key not in factories:
        raise ConfigError(f"Unknown QA backend '{name}'. Known: {', '.join(QA_BACKENDS)}")
    return factories[key]()


__all__ = ["QA_BACKENDS", "build_qa_backend"]
