"""Command line interface for offline evaluations, timing simulation and live replays."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict

from core.config import get_config
from core.log import configure_logging
from core.storage import dumps_json, write_json, write_jsonl
from core.validate import ValidationError

logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BACKEND = 2


def parse_kv(pairs: list[str]) -> Dict[str, Any]:
    result: Dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise argparse.ArgumentTypeError(f"Invalid setting '{pair}'. Use key=value format.")
        key, value = pair.split("=", 1)
        result[key.strip()] = value
    return result


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON settings file")
    common.add_argument("--dataset", type=Path, help="Riddle CSV (Clue 1..9, Answer, Answer 1..4)")
    common.add_argument("--year", type=int, default=2019, help="Contest year for rows without a Year column")
    common.add_argument(
        "--synthetic-riddles",
        type=int,
        metavar="N",
        help="Use N generated riddles (labeled synthetic) instead of --dataset",
    )
    common.add_argument("--riddle-ids", metavar="ID,ID", help="Restrict the dataset to these riddle ids")
    common.add_argument("--seed", type=int, help="Seed for every random draw")
    common.add_argument("--out", type=Path, help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threshold", type=int, help="Confidence threshold for attempting an answer")
    common.add_argument("--qa-backend", help="oracle, oracle-after-clue, constant, scatter, http or stdio")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        help="Override a value with key=value; dotted keys (evaluation.threshold=2) address the settings file, "
        "plain keys (qa_endpoint=...) the environment configuration. Repeatable.",
    )
    common.add_argument("--log-level", help="Logging level (default from LOG_LEVEL)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Riddle contestant pipeline and evaluation harness")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    subparsers.add_parser("eval-all-clues", parents=[common], help="Answer every riddle from all of its clues")

    mock_live = subparsers.add_parser("eval-mock-live", parents=[common], help="Feed accumulated chunks to the voting policy")
    mock_live.add_argument("--granularity", choices=("per_chunk", "per_clue"))

    human = subparsers.add_parser("human-benchmark", parents=[common], help="Score human annotations")
    source = human.add_mutually_exclusive_group(required=True)
    source.add_argument("--annotations", type=Path, help="CSV with riddle_id, answered, clue_number, correct")
    source.add_argument(
        "--synthetic-correct",
        type=int,
        metavar="N",
        help="Generate synthetic annotations with exactly N correct riddles",
    )

    timing = subparsers.add_parser("simulate-timing", parents=[common], help="Discrete-event lag simulation")
    timing.add_argument("--chunks", type=int, default=10)
    timing.add_argument("--mode", choices=("sequential", "pipelined"))

    live = subparsers.add_parser("run-live", parents=[common], help="Replay a transcript through the four stages")
    live.add_argument("--transcript", type=Path, help="Replay CSV (start_s, end_s, text[, riddle_id])")
    live.add_argument("--events", type=Path, help="Write the line-delimited JSON event log here")
    live.add_argument("--mode", choices=("sequential", "pipelined"))
    live.add_argument("--clock", choices=("virtual", "wall"))

    return parser


def _split_overrides(pairs: list[str]) -> tuple[Dict[str, Any], Dict[str, Any]]:
    settings_overrides: Dict[str, Any] = {}
    env_overrides: Dict[str, Any] = {}
    for key, value in parse_kv(pairs).items():
        (settings_overrides if "." in key else env_overrides)[key] = value
    return settings_overrides, env_overrides


def _load_dataset(args: argparse.Namespace, seed: int):
    from riddles.dataset import load_riddle_dataset
    from riddles.synthetic import synthetic_dataset

    if args.dataset is not None:
        dataset = load_riddle_dataset(args.dataset, args.year)
    elif args.synthetic_riddles:
        logger.info("Using %d synthetic riddles", args.synthetic_riddles)
        dataset = synthetic_dataset(args.synthetic_riddles, year=args.year, seed=seed)
    else:
        raise ValidationError("Give --dataset or --synthetic-riddles")
    if args.riddle_ids:
        dataset = dataset.subset(part.strip() for part in args.riddle_ids.split(",") if part.strip())
        logger.info("Restricted to %d riddle(s)", len(dataset))
    return dataset


def _fixed_seconds(plan, name: str, default: float) -> float:
    from pipeline.timing import FixedLatency

    for stage in plan.stages:
        if stage.name == name and isinstance(stage.latency, FixedLatency):
            return stage.latency.seconds
    return default


def _emit(text_or_report, args: argparse.Namespace) -> None:
    from harness.emit import emit_report, render_report
    from scoring.report import EvalReport

    if isinstance(text_or_report, EvalReport):
        if args.out is not None:
            emit_report(text_or_report, args.format, args.out)
        else:
            sys.stdout.write(render_report(text_or_report, args.format))
        return
    if args.out is not None:
        write_json(args.out, text_or_report)
        logger.info("Wrote %s", args.out)
    else:
        sys.stdout.write(dumps_json(text_or_report))


def _run(args: argparse.Namespace) -> int:
    from adapters.registry import build_qa_backend
    from core.settings import load_settings

    settings_overrides, env_overrides = _split_overrides(args.overrides)
    config = get_config(**env_overrides)
    configure_logging(args.log_level or config.log_level)
    settings = load_settings(args.config, settings_overrides)
    seed = args.seed if args.seed is not None else settings.evaluation.seed
    threshold = args.threshold if args.threshold is not None else settings.evaluation.threshold
    backend = args.qa_backend or settings.evaluation.qa_backend

    if args.command == "simulate-timing":
        from pipeline.timing import ExecutionMode, StagePlan, simulate_timing

        plan = settings.stages.build()
        if args.mode:
            plan = StagePlan(stages=plan.stages, mode=ExecutionMode(args.mode), queue_capacity=plan.queue_capacity)
        report = simulate_timing(plan, settings.chunking.build(), args.chunks, seed)
        logger.info("max lag %.3f s over %d chunks (%s)", report.max_lag_s, args.chunks, plan.mode.value)
        _emit(report.to_dict(), args)
        return EXIT_OK

    dataset = None
    if args.command != "run-live" or args.dataset is not None or args.synthetic_riddles or not args.transcript:
        dataset = _load_dataset(args, seed)

    if args.command == "human-benchmark":
        from harness.protocols import human_benchmark
        from riddles.annotations import load_annotations
        from riddles.synthetic import synthetic_annotations

        if args.annotations is not None:
            annotations = load_annotations(args.annotations)
        else:
            logger.info("Using synthetic annotations with %d correct riddles", args.synthetic_correct)
            annotations = synthetic_annotations(dataset, args.synthetic_correct, seed=seed)
        _emit(human_benchmark(dataset, annotations), args)
        return EXIT_OK

    qa = build_qa_backend(
        backend,
        dataset=dataset,
        from_clue=settings.evaluation.oracle_from_clue,
        latency_s=_fixed_seconds(settings.stages.build(), "qa", 0.0) if args.command == "run-live" else 0.0,
        config=config,
    )
    template = settings.prompt.build()
    try:
        if args.command in {"eval-all-clues", "eval-mock-live"}:
            from harness.protocols import run_evaluation

            protocol = "all_clues" if args.command == "eval-all-clues" else "mock_live"
            eval_config = settings.eval_config(
                protocol=protocol,
                threshold=threshold,
                seed=seed,
                qa_backend=backend,
                vote_granularity=getattr(args, "granularity", None),
            )
            _emit(run_evaluation(dataset, qa, eval_config, template), args)
            return EXIT_OK

        if args.command == "run-live":
            return _run_live(args, settings, dataset, qa, template, threshold, seed)
    finally:
        close = getattr(qa, "close", None)
        if callable(close):
            close()

    raise ValidationError(f"Unsupported command {args.command}")


def _run_live(args, settings, dataset, qa, template, threshold: int, seed: int) -> int:
    from adapters.mocks import ReplayStt, StubTts
    from adapters.ports import AdapterSuite
    from pipeline.engine import run_pipeline
    from pipeline.replay import load_replay_transcript, synthesize_transcript
    from pipeline.timing import ExecutionMode, StagePlan
    from segmentation.classifier import resolve_classifier

    chunk = settings.chunking.build()
    detector = settings.detector.build()
    plan = settings.stages.build()
    if args.mode:
        plan = StagePlan(stages=plan.stages, mode=ExecutionMode(args.mode), queue_capacity=plan.queue_capacity)
    if args.transcript is not None:
        source = load_replay_transcript(args.transcript)
    else:
        source = synthesize_transcript(list(dataset), segment_seconds=chunk.chunk_seconds)

    adapters = AdapterSuite(
        stt=ReplayStt(
            substitution_rate=settings.engine.stt_substitution_rate,
            seed=seed,
            rewrites=settings.stt_rewrites(),
            latency_s=_fixed_seconds(plan, "stt", 0.94),
        ),
        classifier=resolve_classifier(detector.classifier),
        qa=qa,
        tts=StubTts(latency_s=_fixed_seconds(plan, "tts", 1.05)),
    )
    logger.info("Live replay with confidence threshold %d", threshold)
    result = run_pipeline(
        source,
        adapters,
        chunk,
        detector,
        threshold,
        dataset=dataset,
        template=template,
        samples_per_step=settings.evaluation.samples_per_step,
        stage_plan=plan,
        seed=seed,
        max_consecutive_failures=settings.engine.max_consecutive_failures,
        stage_attempts=settings.engine.stage_attempts,
        clock=args.clock or settings.engine.clock,
        wall_pace=settings.engine.wall_pace,
    )
    if args.events is not None:
        write_jsonl(args.events, [entry.to_dict() for entry in result.events])
        logger.info("Wrote %d events to %s", len(result.events), args.events)
    logger.info("max lag %.3f s over %d chunks", result.timing.max_lag_s, len(result.timing.per_chunk))
    if dataset is not None:
        _emit(result.report(dataset), args)
    else:
        _emit({"records": [record.to_dict() for record in result.records], "timing": result.timing.to_dict()}, args)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    from adapters.ports import AdapterError
    from pipeline.engine import PipelineAborted

    try:
        return _run(args)
    except (AdapterError, PipelineAborted) as exc:
        logger.error("Backend failure: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (ValidationError, ValueError, OSError, argparse.ArgumentTypeError) as exc:
        logger.error("Invalid input: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
