"""Report emission: JSON documents and per-record CSVs, plus reading JSON reports back."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict

import pandas as pd

from core.csv_json import read_json_file
from core.storage import dataframe_to_csv_text, dumps_json, write_dataframe_csv, write_json
from core.validate import ValidationError
from scoring.report import AttemptRecord, EvalReport

logger = logging.getLogger(__name__)

REPORT_FORMATS: tuple[str, ...] = ("json", "csv")
RECORD_COLUMNS: tuple[str, ...] = (
    "riddle_id",
    "subject",
    "attempted",
    "answer",
    "step_index",
    "clue_number",
    "em",
    "fm",
    "matched_truth",
    "points",
)


def _pct(value: float | None) -> float | None:
    return None if value is None else round(value, 2)


def report_to_dict(report: EvalReport) -> Dict[str, Any]:
    return {
        "protocol": report.protocol,
        "fm_reported": report.fm_reported,
        "n_riddles": report.n_riddles,
        "n_attempted": report.n_attempted,
        "em_pct": _pct(report.em_pct),
        "fm_pct": _pct(report.fm_pct),
        "total_points": report.total_points,
        "per_subject": {
            subject: {"em_pct": _pct(em), "fm_pct": _pct(fm)} for subject, (em, fm) in report.per_subject.items()
        },
        "records": [record.to_dict() for record in report.records],
    }


def records_frame(report: EvalReport) -> pd.DataFrame:
    rows = [record.to_dict() for record in report.records]
    return pd.DataFrame(rows, columns=list(RECORD_COLUMNS))


def render_report(report: EvalReport, fmt: str = "json") -> str:
    fmt = fmt.lower()
    if fmt == "json":
        return dumps_json(report_to_dict(report))
    if fmt == "csv":
        return dataframe_to_csv_text(records_frame(report))
    raise ValueError(f"Unsupported report format '{fmt}'. Known: {', '.join(REPORT_FORMATS)}")


def emit_report(report: EvalReport, fmt: str, path: Path | str) -> Path:
    fmt = fmt.lower()
    if fmt == "json":
        written = write_json(path, report_to_dict(report))
    elif fmt == "csv":
        written = write_dataframe_csv(path, records_frame(report))
    else:
        raise ValueError(f"Unsupported report format '{fmt}'. Known: {', '.join(REPORT_FORMATS)}")
    logger.info("Wrote %s report (%d riddles) to %s", fmt, report.n_riddles, written)
    return written


def load_report(path: Path | str) -> EvalReport:
    """Rebuild a report from its JSON form; aggregates are recomputed from the records."""

    payload = read_json_file(path)
    try:
        records = tuple(AttemptRecord.from_dict(item) for item in payload["records"])
        return EvalReport(
            records=records,
            protocol=str(payload.get("protocol", "all_clues")),
            fm_reported=bool(payload.get("fm_reported", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: not a valid report: {exc}") from exc


__all__ = [
    "REPORT_FORMATS",
    "RECORD_COLUMNS",
    "report_to_dict",
    "records_frame",
    "render_report",
    "emit_report",
    "load_report",
]
