"""Application configuration utilities."""
from __future__ import annotations

import os
from dataclasses import MISSING, dataclass, fields
from functools import lru_cache
from typing import Any, Dict

from dotenv import load_dotenv

from .validate import ConfigError

load_dotenv()

_ENV_NAMES: Dict[str, str] = {
    "log_level": "LOG_LEVEL",
    "http_timeout": "HTTP_TIMEOUT",
    "http_max_retries": "HTTP_MAX_RETRIES",
    "http_backoff_base": "HTTP_BACKOFF_BASE",
    "user_agent": "USER_AGENT",
    "qa_endpoint": "QA_ENDPOINT",
    "qa_command": "QA_COMMAND",
}


@dataclass(slots=True)
class AppConfig:
    """Process-level configuration loaded from environment variables."""

    log_level: str = "INFO"
    http_timeout: float = 15.0
    http_max_retries: int = 3
    http_backoff_base: float = 0.5
    user_agent: str = "riddle-contestant/0.1"
    qa_endpoint: str | None = None
    qa_command: str | None = None

    def __init__(self, **overrides: Any) -> None:
        field_defaults: Dict[str, Any] = {}
        for field in fields(self):
            if field.default is MISSING:  # pragma: no cover - every field currently has a default
                raise TypeError(f"Field '{field.name}' requires a default value")
            field_defaults[field.name] = field.default

        unknown = sorted(set(overrides) - set(field_defaults))
        if unknown:
            raise ConfigError(f"Unknown configuration key(s): {', '.join(unknown)}")

        values: Dict[str, Any] = {
            name: os.getenv(env_name, field_defaults[name]) for name, env_name in _ENV_NAMES.items()
        }
        values.update(overrides)

        object.__setattr__(self, "log_level", str(values["log_level"] or field_defaults["log_level"]).upper())
        object.__setattr__(self, "http_timeout", float(values["http_timeout"]))
        object.__setattr__(self, "http_max_retries", int(values["http_max_retries"]))
        object.__setattr__(self, "http_backoff_base", float(values["http_backoff_base"]))
        object.__setattr__(self, "user_agent", values["user_agent"] or field_defaults["user_agent"])
        object.__setattr__(self, "qa_endpoint", values.get("qa_endpoint") or None)
        object.__setattr__(self, "qa_command", values.get("qa_command") or None)

    def headers(self) -> Dict[str, str]:
        """Construct default HTTP headers for remote backends."""

        return {"User-Agent": self.user_agent, "Content-Type": "application/json"}


@lru_cache(maxsize=1)
def get_config(**overrides: Any) -> AppConfig:
    """Return a cached application configuration instance."""

    return AppConfig(**overrides)


__all__ = ["AppConfig", "get_config"]
