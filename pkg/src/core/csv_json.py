"""Utilities for parsing CSV and JSON inputs with encoding detection."""
from __future__ import annotations

import io
import json
from pathlib import Path
from typing import Any

import chardet
import pandas as pd


def detect_encoding(payload: bytes, fallback: str = "utf-8") -> str:
    """Detect the encoding of the given payload."""

    if not payload:
        return fallback
    detection = chardet.detect(payload)
    encoding = detection.get("encoding") or fallback
    # chardet reports plain ASCII for most riddle files; utf-8 is a superset.
    if encoding.lower() == "ascii":
        return fallback
    return encoding


def parse_json(text: str | bytes) -> Any:
    """Parse a JSON payload from a string or bytes."""

    if isinstance(text, bytes):
        encoding = detect_encoding(text)
        text = text.decode(encoding)
    return json.loads(text)


def parse_csv(payload: bytes, *, encoding: str | None = None, **kwargs: Any) -> pd.DataFrame:
    """Parse a CSV payload into a string-typed DataFrame; blank cells stay ``""``."""

    enc = encoding or detect_encoding(payload, fallback="utf-8")
    if not payload.strip():
        return pd.DataFrame()
    buffer = io.BytesIO(payload)
    df = pd.read_csv(
        buffer,
        dtype=str,
        keep_default_na=False,
        encoding=enc,
        skipinitialspace=False,
        **kwargs,
    )
    df.columns = [str(column).strip() for column in df.columns]
    return df


def read_csv_file(path: Path | str, **kwargs: Any) -> pd.DataFrame:
    """Read a CSV file from disk, re-raising I/O problems with the path attached."""

    csv_path = Path(path)
    try:
        payload = csv_path.read_bytes()
    except OSError as exc:
        raise type(exc)(f"Cannot read CSV file {csv_path}: {exc.strerror or exc}") from exc
    return parse_csv(payload, **kwargs)


def read_json_file(path: Path | str) -> Any:
    json_path = Path(path)
    try:
        payload = json_path.read_bytes()
    except OSError as exc:
        raise type(exc)(f"Cannot read JSON file {json_path}: {exc.strerror or exc}") from exc
    return parse_json(payload)


__all__ = [
    "detect_encoding",
    "parse_json",
    "parse_csv",
    "read_csv_file",
    "read_json_file",
]
