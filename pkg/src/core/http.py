"""Pooled HTTP session for remote QA backends, with transport-level retries."""
from __future__ import annotations

import logging
from typing import Any, Iterable, Mapping, Optional

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from .config import AppConfig, get_config

logger = logging.getLogger(__name__)

RETRY_STATUSES: Iterable[int] = (429, 500, 502, 503, 504)


def build_retry(config: AppConfig) -> Retry:
    return Retry(
        total=config.http_max_retries,
        connect=config.http_max_retries,
        read=config.http_max_retries,
        backoff_factor=config.http_backoff_base,
        status_forcelist=tuple(RETRY_STATUSES),
        allowed_methods=frozenset({"POST"}),
        raise_on_status=False,
    )


class HTTPClient:
    """One :class:`requests.Session` per backend; closed with the backend."""

    def __init__(self, config: Optional[AppConfig] = None) -> None:
        self.config = config or get_config()
        self.session = requests.Session()
        adapter = HTTPAdapter(max_retries=build_retry(self.config))
        for prefix in ("http://", "https://"):
            self.session.mount(prefix, adapter)
        self.session.headers.update(self.config.headers())

    def close(self) -> None:
        self.session.close()

    def __enter__(self) -> "HTTPClient":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def post_json(self, url: str, payload: Mapping[str, Any]) -> Any:
        """POST ``payload`` and decode the JSON reply; HTTP errors raise, bad JSON raises ``ValueError``."""

        response = self.session.post(url, json=dict(payload), timeout=self.config.http_timeout)
        response.raise_for_status()
        logger.debug("POST %s -> %s in %.3fs", url, response.status_code, response.elapsed.total_seconds())
        return response.json()


__all__ = ["HTTPClient", "RETRY_STATUSES", "build_retry"]
