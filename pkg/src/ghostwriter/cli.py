"""Command-line entry points: gw-serve, gw-lsp, gw-train, gw-backtest, gw-metrics."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .backends import DecodeParams, OracleBackend, RemoteBackend, backend_from_config
from .backtest import (
    DEFAULT_GAP_MAX,
    LANGUAGE_EXTENSIONS,
    in_holdout,
    make_samples,
    normalize_language,
    run_backtest,
)
from .config import load_settings, parse_bind
from .lsp.orchestrator import OrchestratorConfig
from .lsp.server import http_backend_call, run_stdio
from .ngram import NGramModel, build_ngram
from .service import InferenceService, ServiceConfig, serve_forever
from .telemetry import (
    EventLog,
    build_report,
    read_events,
    render_csv,
    render_table,
)
from .tokenization import TriggerSet


def _setup_logging(verbose: bool = False):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _value(arg, fallback):
    return fallback if arg is None else arg


def serve_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gw-serve", description="Run the completion inference service.")
    parser.add_argument("--bind", help="host:port to listen on")
    parser.add_argument("--backend", choices=("ngram", "oracle", "remote"), default="ngram")
    parser.add_argument("--model-path", help="n-gram model file / oracle truth JSON / upstream url")
    parser.add_argument("--budget", type=int)
    parser.add_argument("--split", type=float)
    parser.add_argument("--beam-threshold", type=int)
    parser.add_argument("--beam-width", type=int)
    parser.add_argument("--max-new-tokens", type=int)
    parser.add_argument("--deadline-ms", type=int)
    parser.add_argument("--config", help="JSON settings file")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    settings = load_settings(args.config)

    backend = backend_from_config(args.backend, model_path=args.model_path)
    service = InferenceService(
        backend,
        ServiceConfig(
            budget=_value(args.budget, settings.budget),
            split=_value(args.split, settings.split),
            deadline_ms=_value(args.deadline_ms, settings.deadline_ms),
            params=DecodeParams(
                max_new_tokens=_value(args.max_new_tokens, settings.max_new_tokens),
                beam_threshold_tokens=_value(args.beam_threshold, settings.beam_threshold),
                beam_width=_value(args.beam_width, settings.beam_width),
            ),
            triggers=TriggerSet(tuple(settings.triggers)),
            metadata_fields=tuple(settings.metadata_fields),
        ),
    )
    host, port = parse_bind(_value(args.bind, settings.bind))
    serve_forever(service, host, port)
    return 0


def lsp_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gw-lsp", description="Run the completion language server on stdio.")
    parser.add_argument("--service-url", help="inference service base url")
    parser.add_argument("--debounce-ms", type=int)
    parser.add_argument("--cache-capacity", type=int)
    parser.add_argument("--min-display-ms", type=int)
    parser.add_argument("--telemetry-log", help="append suggestion events to this ndjson file")
    parser.add_argument("--budget", type=int)
    parser.add_argument("--split", type=float)
    parser.add_argument("--session-id", default="local")
    parser.add_argument("--config", help="JSON settings file")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    settings = load_settings(args.config)

    telemetry = EventLog(args.telemetry_log)
    config = OrchestratorConfig(
        debounce_ms=_value(args.debounce_ms, settings.debounce_ms),
        cache_capacity=_value(args.cache_capacity, settings.cache_capacity),
        min_display_ms=_value(args.min_display_ms, settings.min_display_ms),
        budget=_value(args.budget, settings.budget),
        split=_value(args.split, settings.split),
        session_id=args.session_id,
        triggers=TriggerSet(tuple(settings.triggers)),
        metadata_fields=tuple(settings.metadata_fields),
    )
    backend_call = http_backend_call(_value(args.service_url, settings.service_url))
    run_stdio(backend_call, telemetry=telemetry, config=config)
    return 0


def _corpus_files(corpus: str, languages: list[str], holdout_frac: float, exclude_holdout: bool):
    root = Path(corpus)
    extensions = tuple(
        ext for lang in languages for ext in LANGUAGE_EXTENSIONS[normalize_language(lang)]
    )
    for path in sorted(root.rglob("*")):
        if not (path.is_file() and path.suffix in extensions):
            continue
        rel = str(path.relative_to(root))
        if exclude_holdout and holdout_frac > 0.0 and in_holdout(rel, holdout_frac):
            continue
        yield rel, path.read_text(encoding="utf-8", errors="replace")


def train_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gw-train", description="Build an n-gram model from a corpus.")
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--order", type=int, default=4)
    parser.add_argument("--languages", default="python", help="comma-separated, e.g. py,cpp")
    parser.add_argument(
        "--holdout-frac",
        type=float,
        default=0.0,
        help="exclude this path-hash fraction of files (reserved for backtesting)",
    )
    parser.add_argument("--config", help="JSON settings file")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    settings = load_settings(args.config)

    languages = [part for part in args.languages.split(",") if part]
    files = list(_corpus_files(args.corpus, languages, args.holdout_frac, exclude_holdout=True))
    model = build_ngram(files, order=args.order, triggers=TriggerSet(tuple(settings.triggers)))
    model.save(args.out)
    print(f"built order-{args.order} model from {len(files)} files -> {args.out}")
    print(f"fingerprint: {model.fingerprint()}")
    return 0


def backtest_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gw-backtest", description="Masked-line backtest against a backend.")
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--languages", required=True, help="comma-separated, e.g. py,cpp")
    parser.add_argument("--n", type=int, default=500, help="samples per language")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--backend-url", help="score a remote inference service")
    parser.add_argument("--model-path", help="score a local n-gram model file")
    parser.add_argument(
        "--oracle-self-test",
        action="store_true",
        help="score an oracle built from the sample targets (expects EM=100)",
    )
    parser.add_argument("--report", help="write the JSON report here")
    parser.add_argument("--strict-em", action="store_true", help="byte-exact Exact Match")
    parser.add_argument("--gap-max", type=int, default=DEFAULT_GAP_MAX)
    parser.add_argument("--holdout-frac", type=float, default=0.0)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--split", type=float)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--config", help="JSON settings file")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    settings = load_settings(args.config)
    triggers = TriggerSet(tuple(settings.triggers))

    languages = [part for part in args.languages.split(",") if part]
    samples = make_samples(
        args.corpus,
        languages,
        n_per_language=args.n,
        seed=args.seed,
        gap_max=args.gap_max,
        max_target_tokens=settings.max_target_tokens,
        triggers=triggers,
        holdout_frac=args.holdout_frac,
    )

    if args.oracle_self_test:
        backend = OracleBackend({s.sample_id: s.target for s in samples})
    elif args.backend_url:
        backend = RemoteBackend(args.backend_url)
    elif args.model_path:
        backend = backend_from_config("ngram", model_path=args.model_path)
    else:
        parser.error("one of --backend-url, --model-path, --oracle-self-test is required")

    report = run_backtest(
        samples,
        backend,
        params=DecodeParams(
            max_new_tokens=settings.max_new_tokens,
            beam_threshold_tokens=settings.beam_threshold,
            beam_width=settings.beam_width,
        ),
        budget=_value(args.budget, settings.budget),
        split=_value(args.split, settings.split),
        strict_em=args.strict_em,
        workers=args.workers,
        triggers=triggers,
        config_echo={"seed": args.seed, "gap_max": args.gap_max, "n_per_language": args.n},
    )
    print(report.render_table())
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"report written to {args.report}")
    if len(report.failures) > 0.05 * max(1, len(samples)):
        print(f"error: {len(report.failures)}/{len(samples)} samples failed", file=sys.stderr)
        return 2
    return 0


def metrics_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gw-metrics", description="Adoption metrics over a telemetry log.")
    sub = parser.add_subparsers(dest="command", required=True)
    report_parser = sub.add_parser("report", help="compute acceptance rate and AI-typed share")
    report_parser.add_argument("--log", required=True, help="ndjson event log")
    report_parser.add_argument("--min-display-ms", type=int)
    report_parser.add_argument("--format", choices=("table", "json", "csv"), default="table")
    report_parser.add_argument("--config", help="JSON settings file")
    args = parser.parse_args(argv)
    settings = load_settings(args.config)

    events = read_events(args.log)
    report = build_report(events, _value(args.min_display_ms, settings.min_display_ms))
    if args.format == "json":
        import json

        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    elif args.format == "csv":
        print(render_csv(report), end="")
    else:
        print(render_table(report))
    return 0
