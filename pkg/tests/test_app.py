from __future__ import annotations

import argparse
import json

import pytest

from app import EXIT_BACKEND, EXIT_INVALID, EXIT_OK, main, parse_kv
from core.config import AppConfig
from core.settings import load_settings, settings_from_mapping
from core.validate import ConfigError
from pipeline.timing import ExecutionMode, NormalLatency


def test_parse_kv_and_invalid():
    assert parse_kv(["foo=bar", "evaluation.threshold=2"]) == {"foo": "bar", "evaluation.threshold": "2"}
    with pytest.raises(argparse.ArgumentTypeError):
        parse_kv(["invalid"])


def test_app_config_env_overrides(monkeypatch):
    monkeypatch.setenv("QA_ENDPOINT", "http://qa.local/answer")
    monkeypatch.setenv("HTTP_TIMEOUT", "30")
    config = AppConfig(log_level="debug")
    assert config.qa_endpoint == "http://qa.local/answer"
    assert config.http_timeout == 30.0
    assert config.log_level == "DEBUG"
    assert AppConfig(qa_endpoint="").qa_endpoint is None
    with pytest.raises(ConfigError):
        AppConfig(unknown_option=True)


def test_load_settings_defaults_file_and_overrides(tmp_path):
    defaults = load_settings()
    assert defaults.evaluation.threshold == 3
    assert defaults.chunking.build().chunk_seconds == 5.0

    path = tmp_path / "settings.json"
    path.write_text(
        json.dumps(
            {
                "evaluation": {"threshold": 4, "protocol": "mock_live"},
                "stages": {"mode": "pipelined", "latency": {"qa": {"kind": "normal", "mean": 1.0, "std": 0.2}}},
                "engine": {"stt_rewrites": [{"source": "first riddle", "target": "test riddle"}]},
            }
        ),
        encoding="utf-8",
    )
    settings = load_settings(path, {"evaluation.threshold": "2", "detector.lenient_keyword": "true"})
    assert settings.evaluation.threshold == 2
    assert settings.detector.build().lenient_keyword is True
    plan = settings.stages.build()
    assert plan.mode is ExecutionMode.PIPELINED
    assert isinstance(plan.stages[2].latency, NormalLatency)
    assert settings.stt_rewrites()[0].apply("The first riddle") == "The test riddle"
    eval_config = settings.eval_config(vote_granularity=None, threshold=5)
    assert eval_config.threshold == 5 and eval_config.protocol.value == "mock_live"


@pytest.mark.parametrize(
    "payload",
    [
        {"evaluation": {"threshold": 0}},
        {"evaluation": {"confidence": 3}},
        {"stages": {"latency": {"asr": 1.0}}},
        {"engine": {"clock": "sundial"}},
    ],
)
def test_invalid_settings_raise_config_error(payload):
    with pytest.raises(ConfigError):
        settings_from_mapping(payload)


def test_settings_file_must_be_an_object(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_settings(path)


def test_cli_eval_all_clues_writes_report(tmp_path):
    out = tmp_path / "report.json"
    code = main(["eval-all-clues", "--synthetic-riddles", "8", "--qa-backend", "oracle", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["protocol"] == "all_clues"
    assert payload["em_pct"] == 100.0 and payload["n_riddles"] == 8


def test_cli_mock_live_csv(tmp_path):
    out = tmp_path / "report.csv"
    code = main(
        [
            "eval-mock-live",
            "--synthetic-riddles",
            "4",
            "--granularity",
            "per_clue",
            "--format",
            "csv",
            "--out",
            str(out),
        ]
    )
    assert code == EXIT_OK
    assert len(out.read_text(encoding="utf-8").splitlines()) == 5


def test_cli_human_benchmark(capsys):
    code = main(["human-benchmark", "--synthetic-riddles", "156", "--synthetic-correct", "119"])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["em_pct"] == 76.28 and payload["fm_pct"] is None


def test_cli_simulate_timing(capsys):
    code = main(["simulate-timing", "--chunks", "10"])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["max_lag_s"] == pytest.approx(3.04)
    assert len(payload["per_chunk"]) == 10


def test_cli_run_live_writes_events(tmp_path, capsys):
    events = tmp_path / "events.jsonl"
    code = main(["run-live", "--synthetic-riddles", "2", "--events", str(events), "--mode", "pipelined"])
    assert code == EXIT_OK
    lines = events.read_text(encoding="utf-8").splitlines()
    kinds = {json.loads(line)["kind"] for line in lines}
    assert {"transcribed", "riddle_started", "attempt", "spoken"} <= kinds
    assert json.loads(capsys.readouterr().out)["em_pct"] == 100.0


def test_cli_restricts_to_riddle_ids(capsys):
    code = main(["eval-all-clues", "--synthetic-riddles", "6", "--riddle-ids", "syn-2019-002, syn-2019-005"])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["n_riddles"] == 2
    assert [r["riddle_id"] for r in payload["records"]] == ["syn-2019-002", "syn-2019-005"]
    assert main(["eval-all-clues", "--synthetic-riddles", "2", "--riddle-ids", "syn-2019-009"]) == EXIT_INVALID


def test_cli_invalid_settings_exit_one():
    assert main(["eval-all-clues", "--synthetic-riddles", "2", "--set", "evaluation.threshold=0"]) == EXIT_INVALID


def test_cli_unknown_environment_key_exit_one(capsys):
    assert main(["simulate-timing", "--set", "bogus=1"]) == EXIT_INVALID
    assert "bogus" in capsys.readouterr().err


def test_cli_missing_dataset_exit_one():
    assert main(["eval-all-clues"]) == EXIT_INVALID


def test_cli_unreachable_backend_exit_two():
    code = main(["eval-all-clues", "--synthetic-riddles", "2", "--qa-backend", "http", "--set", "qa_endpoint="])
    assert code == EXIT_BACKEND
