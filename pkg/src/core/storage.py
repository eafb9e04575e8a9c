"""Helpers for writing reports, event logs and canonical CSVs."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

import pandas as pd


def ensure_directory(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def dumps_json(payload: Any) -> str:
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def dumps_jsonl(records: Sequence[Mapping[str, object]]) -> str:
    return "".join(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n" for record in records)


def _write_text(path: Path, text: str) -> Path:
    try:
        ensure_directory(path.parent)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise type(exc)(f"Cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_json(path: Path | str, payload: Any) -> Path:
    return _write_text(Path(path), dumps_json(payload))


def write_jsonl(path: Path | str, records: Sequence[Mapping[str, object]]) -> Path:
    return _write_text(Path(path), dumps_jsonl(records))


def dataframe_to_csv_text(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, lineterminator="\n")


def write_dataframe_csv(path: Path | str, df: pd.DataFrame) -> Path:
    return _write_text(Path(path), dataframe_to_csv_text(df))


__all__ = [
    "ensure_directory",
    "dumps_json",
    "dumps_jsonl",
    "write_json",
    "write_jsonl",
    "dataframe_to_csv_text",
    "write_dataframe_csv",
]
