"""Structured engine settings read from a JSON config file and converted into domain objects."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic import ValidationError as PydanticValidationError

from .csv_json import read_json_file
from .validate import ConfigError

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DetectorSettings(_Section):
    start_phrases: Optional[List[str]] = None
    end_phrases: Optional[List[str]] = None
    lenient_keyword: bool = False
    classifier: str = "rule_baseline"

    def build(self):
        from segmentation.detector import DEFAULT_END_PHRASES, DEFAULT_START_PHRASES, DetectorConfig

        return DetectorConfig(
            start_phrases=tuple(self.start_phrases) if self.start_phrases is not None else DEFAULT_START_PHRASES,
            end_phrases=tuple(self.end_phrases) if self.end_phrases is not None else DEFAULT_END_PHRASES,
            lenient_keyword=self.lenient_keyword,
            classifier=self.classifier,
        )


class PromptSettings(_Section):
    role_preamble: Optional[str] = None
    reasoning_instruction: Optional[str] = None
    penalty_clause: Optional[str] = None
    few_shot_clues: Optional[str] = None
    few_shot_answer: Optional[str] = None
    output_format_instruction: Optional[str] = None

    def build(self):
        from policy.prompt import DEFAULT_PROMPT_TEMPLATE, PromptTemplate

        base = DEFAULT_PROMPT_TEMPLATE
        return PromptTemplate(
            role_preamble=self.role_preamble if self.role_preamble is not None else base.role_preamble,
            reasoning_instruction=(
                self.reasoning_instruction if self.reasoning_instruction is not None else base.reasoning_instruction
            ),
            penalty_clause=self.penalty_clause if self.penalty_clause is not None else base.penalty_clause,
            few_shot_example=(
                self.few_shot_clues if self.few_shot_clues is not None else base.few_shot_example[0],
                self.few_shot_answer if self.few_shot_answer is not None else base.few_shot_example[1],
            ),
            output_format_instruction=(
                self.output_format_instruction
                if self.output_format_instruction is not None
                else base.output_format_instruction
            ),
        )


class ChunkingSettings(_Section):
    chunk_seconds: float = Field(default=5.0, gt=0)
    words_per_chunk: int = Field(default=7, ge=1)

    def build(self):
        from pipeline.chunking import ChunkPlan

        return ChunkPlan(chunk_seconds=self.chunk_seconds, words_per_chunk=self.words_per_chunk)


LatencySpec = Union[float, Dict[str, Any]]


class StageSettings(_Section):
    mode: Literal["sequential", "pipelined"] = "sequential"
    queue_capacity: int = 8
    latency: Dict[str, LatencySpec] = Field(default_factory=dict)

    @field_validator("latency")
    @classmethod
    def _known_stages(cls, value: Dict[str, LatencySpec]) -> Dict[str, LatencySpec]:
        unknown = sorted(set(value) - {"stt", "qe", "qa", "tts"})
        if unknown:
            raise ValueError(f"unknown stage(s): {', '.join(unknown)}")
        return value

    def build(self):
        from pipeline.timing import (
            DEFAULT_STAGE_LATENCIES,
            STAGE_NAMES,
            ExecutionMode,
            StagePlan,
            StageSpec,
            latency_from_mapping,
        )

        stages = tuple(
            StageSpec(
                name,
                latency_from_mapping(self.latency.get(name, DEFAULT_STAGE_LATENCIES[name])),
                skippable=name in {"qa", "tts"},
            )
            for name in STAGE_NAMES
        )
        return StagePlan(stages=stages, mode=ExecutionMode(self.mode), queue_capacity=self.queue_capacity)


class EvaluationSettings(_Section):
    protocol: Literal["all_clues", "mock_live"] = "all_clues"
    threshold: int = Field(default=3, ge=1)
    samples_per_step: int = Field(default=3, ge=1)
    vote_granularity: Literal["per_chunk", "per_clue"] = "per_chunk"
    seed: int = 0
    qa_backend: str = "oracle"
    oracle_from_clue: int = Field(default=3, ge=1)
    normalize_clues: bool = False
    workers: int = Field(default=1, ge=1)


class RewriteSettings(_Section):
    source: str
    target: str


class EngineRunSettings(_Section):
    max_consecutive_failures: int = Field(default=3, ge=1)
    stage_attempts: int = Field(default=1, ge=1)
    clock: Literal["virtual", "wall"] = "virtual"
    wall_pace: float = Field(default=0.0, ge=0.0)
    stt_substitution_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    stt_rewrites: List[RewriteSettings] = Field(default_factory=list)


class EngineSettings(_Section):
    detector: DetectorSettings = Field(default_factory=DetectorSettings)
    prompt: PromptSettings = Field(default_factory=PromptSettings)
    chunking: ChunkingSettings = Field(default_factory=ChunkingSettings)
    stages: StageSettings = Field(default_factory=StageSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    engine: EngineRunSettings = Field(default_factory=EngineRunSettings)

    def eval_config(self, **overrides: Any):
        from harness.protocols import EvalConfig

        values: Dict[str, Any] = self.evaluation.model_dump()
        values.update({key: value for key, value in overrides.items() if value is not None})
        return EvalConfig(chunking=self.chunking.build(), **values)

    def stt_rewrites(self):
        from adapters.mocks import PhraseRewrite

        return tuple(PhraseRewrite(rewrite.source, rewrite.target) for rewrite in self.engine.stt_rewrites)


def _assign_path(tree: Dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"Cannot set '{dotted}': '{key}' is not a section")
        node = child
    node[keys[-1]] = value


def settings_from_mapping(payload: Mapping[str, Any], *, source: str = "settings") -> EngineSettings:
    try:
        return EngineSettings.model_validate(dict(payload))
    except PydanticValidationError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_settings(path: Path | str | None = None, overrides: Mapping[str, Any] | None = None) -> EngineSettings:
    """Read ``path`` (or defaults) and apply dotted overrides such as ``{"evaluation.threshold": 2}``."""

    payload: Dict[str, Any] = {}
    if path is not None:
        raw = read_json_file(path)
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: settings must be a JSON object")
        payload = raw
        logger.info("Loaded settings from %s", path)
    for dotted, value in (overrides or {}).items():
        _assign_path(payload, dotted, value)
    return settings_from_mapping(payload, source=str(path or "settings"))


__all__ = [
    "DetectorSettings",
    "PromptSettings",
    "ChunkingSettings",
    "StageSettings",
    "EvaluationSettings",
    "RewriteSettings",
    "EngineRunSettings",
    "EngineSettings",
    "settings_from_mapping",
    "load_settings",
]
