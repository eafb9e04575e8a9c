"""Out-of-process QA backends speaking the ``{input_text, n_samples} -> {answers}`` contract."""
from __future__ import annotations

import json
import logging
import queue
import shlex
import subprocess
import threading
from typing import IO, Any, Mapping, Optional, Sequence

import requests

from core.config import AppConfig, get_config
from core.http import HTTPClient

from .ports import AdapterError, QaRequest

logger = logging.getLogger(__name__)


def parse_answers(payload: Any, expected: int) -> list[str]:
    if not isinstance(payload, Mapping) or not isinstance(payload.get("answers"), list):
        raise AdapterError("QA backend reply lacks an 'answers' list", port="qa")
    answers = [str(answer) for answer in payload["answers"]]
    if len(answers) != expected:
        raise AdapterError(f"QA backend returned {len(answers)} answers, expected {expected}", port="qa")
    return answers


class HttpQaBackend:
    """POSTs the request as JSON to a QA service; transport retries come from the HTTP client."""

    concurrent_safe = False

    def __init__(self, url: str | None = None, *, config: Optional[AppConfig] = None, client: HTTPClient | None = None) -> None:
        self.config = config or get_config()
        self.url = url or self.config.qa_endpoint
        if not self.url:
            raise AdapterError("No QA endpoint configured (set QA_ENDPOINT)", port="qa")
        self.client = client or HTTPClient(self.config)
        self.latency_s = 0.0

    def generate(self, request: QaRequest) -> list[str]:
        try:
            payload = self.client.post_json(self.url, request.to_wire())
        except (requests.RequestException, ValueError) as exc:
            raise AdapterError(f"QA request to {self.url} failed: {exc}", port="qa") from exc
        return parse_answers(payload, request.n_samples)

    def close(self) -> None:
        self.client.close()


def _pump_lines(stream: IO[str], lines: "queue.Queue[str]") -> None:
    for line in stream:
        lines.put(line)
    lines.put("")


class StdioQaBackend:
    """Keeps a subprocess open and exchanges one JSON line per request."""

    concurrent_safe = False

    def __init__(
        self,
        command: str | Sequence[str] | None = None,
        *,
        config: Optional[AppConfig] = None,
        timeout: float | None = None,
    ) -> None:
        cfg = config or get_config()
        command = command or cfg.qa_command
        if not command:
            raise AdapterError("No QA command configured (set QA_COMMAND)", port="qa")
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = cfg.http_timeout if timeout is None else timeout
        self.latency_s = 0.0
        self._lock = threading.Lock()
        self._process: subprocess.Popen[str] | None = None
        self._lines: queue.Queue[str] = queue.Queue()

    def _ensure_process(self) -> subprocess.Popen[str]:
        if self._process is None or self._process.poll() is not None:
            try:
                self._process = subprocess.Popen(
                    self.argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise AdapterError(f"Cannot start QA backend {self.argv!r}: {exc}", port="qa") from exc
            self._lines = queue.Queue()
            threading.Thread(
                target=_pump_lines, args=(self._process.stdout, self._lines), name="stdio-qa-reader", daemon=True
            ).start()
            logger.info("Started stdio QA backend: %s", " ".join(self.argv))
        return self._process

    def generate(self, request: QaRequest) -> list[str]:
        with self._lock:
            process = self._ensure_process()
            assert process.stdin is not None and process.stdout is not None
            try:
                process.stdin.write(json.dumps(request.to_wire()) + "\n")
                process.stdin.flush()
            except OSError as exc:
                raise AdapterError(f"QA backend pipe failed: {exc}", port="qa") from exc
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                self.close()
                raise AdapterError(f"QA backend gave no reply within {self.timeout:g}s", port="qa") from None
        if not line:
            raise AdapterError("QA backend closed its output", port="qa")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"QA backend replied with invalid JSON: {line.strip()[:80]!r}", port="qa") from exc
        return parse_answers(payload, request.n_samples)

    def close(self) -> None:
        if self._process is not None and self._process.poll() is None:
            self._process.kill()
            self._process.wait(timeout=5)
        self._process = None


__all__ = ["parse_answers", "HttpQaBackend", "StdioQaBackend"]
