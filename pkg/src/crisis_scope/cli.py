"""Command-line entry point.

Commands: ingest, train-classifier, classify, rank, summarize, evaluate,
serve. Every command accepts --config and --seed; results go to --out.
Exit codes: 0 success, 1 validation/usage error, 2 backend or IO error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import PipelineConfig, load_config
from .corpus import load_messages
from .errors import BackendError, ValidationError
from .evaluate import results_to_csv, results_to_json, run_loeo, run_lolo
from .models import (
    build_model,
    fit_featurizer,
    load_checkpoint,
    predict_scores,
    save_checkpoint,
    train_classifier,
)
from .queries import parse_query
from .session import Session
from .summarize import summary_to_record


class _UsageError(Exception):
    def __init__(self, message: str, parser: argparse.ArgumentParser):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as exit code 1."""

    def error(self, message):
        raise _UsageError(message, self)


def _add_common(parser: argparse.ArgumentParser, out_required: bool = False) -> None:
    parser.add_argument("--config", help="pipeline config JSON (default: $CRISIS_SCOPE_CONFIG)")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", required=out_required, help="output file path")


def _load(args) -> PipelineConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
        config.model = dataclasses.replace(config.model, seed=args.seed)
        config.summary = dataclasses.replace(config.summary, seed=args.seed)
    return config


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, ensure_ascii=False, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _cmd_ingest(args) -> int:
    config = _load(args)
    paths = args.messages or config.data.messages
    if not paths:
        raise ValidationError("no message files given (use --messages or config data.messages)")
    events = []
    for path in paths:
        collection = load_messages(path)
        events.append(
            {
                "event_id": collection.event_id,
                "messages": len(collection),
                "informative": collection.informative_count,
                "languages": sorted(collection.languages),
            }
        )
    _write_json({"events": events, "seed": config.seed}, args.out)
    return 0


def _cmd_train_classifier(args) -> int:
    config = _load(args)
    session = Session.from_config(config)
    labeled = [
        m
        for coll in session.collections.values()
        for m in coll.messages
        if m.informative is not None
    ]
    featurizer = fit_featurizer(session.annotators, session.encoder, labeled)
    model = build_model(config.model, with_similarity_branch=False)
    clf = train_classifier(model, labeled, featurizer, config.model)
    save_checkpoint(clf, args.out)
    print(
        f"trained on {len(labeled)} messages, "
        f"final loss {clf.history.train_loss[-1]:.4f}, saved to {args.out}"
    )
    return 0


def _cmd_classify(args) -> int:
    config = _load(args)
    clf = load_checkpoint(args.model, config.build_annotators(), config.build_encoder())
    collection = load_messages(args.messages)
    scores = predict_scores(clf, collection.messages)
    lines = [
        json.dumps(
            {"id": m.id, "probability": float(s), "informative": bool(s > 0.5)},
            ensure_ascii=False,
        )
        for m, s in zip(collection.messages, scores)
    ]
    body = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)
    return 0


def _session_with_query(args, config: PipelineConfig) -> tuple[Session, str]:
    session = Session.from_config(config)
    query = parse_query(args.query)
    query_id = session.upsert_query(query, query_id=Path(args.query).stem)
    return session, query_id


def _cmd_rank(args) -> int:
    config = _load(args)
    session, query_id = _session_with_query(args, config)
    results = session.rank(query_id, args.event, k=args.k)
    payload = {
        "query_id": query_id,
        "event_id": args.event,
        "candidates": [
            {
                "message_id": c.message_id,
                "text": c.text,
                "lang": c.lang,
                "score": c.score,
                "position": c.position,
                "features": list(c.features.as_array()),
            }
            for c in results
        ],
        **session.meta(),
    }
    _write_json(payload, args.out)
    return 0


def _cmd_summarize(args) -> int:
    config = _load(args)
    session, query_id = _session_with_query(args, config)
    summary = session.summarize(query_id, args.event, args.mode, args.budget)
    payload = {**summary_to_record(summary), **session.meta()}
    _write_json(payload, args.out)
    return 0


def _cmd_evaluate(args) -> int:
    config = _load(args)
    collections = [load_messages(path) for path in config.data.messages]
    if not collections:
        raise ValidationError("config data.messages is empty; nothing to evaluate")
    folds = run_lolo(collections, config) if args.protocol == "lolo" else run_loeo(collections, config)
    csv_text = results_to_csv(folds)
    json_text = results_to_json(folds, meta={"seed": config.seed})
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text, encoding="utf-8")
        out.with_suffix(".json").write_text(json_text, encoding="utf-8")
        print(f"wrote {out} and {out.with_suffix('.json')}")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load(args)
    session = Session.from_config(config)
    app = create_app(session, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="crisis-scope", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate message files")
    _add_common(p)
    p.add_argument("--messages", nargs="*", help="JSONL message files")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train-classifier", help="train the informative classifier")
    _add_common(p, out_required=True)
    p.set_defaults(func=_cmd_train_classifier)

    p = sub.add_parser("classify", help="score messages with a trained classifier")
    _add_common(p)
    p.add_argument("--model", required=True, help="classifier checkpoint")
    p.add_argument("--messages", required=True, help="JSONL message file")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("rank", help="rank an event's messages against a query")
    _add_common(p)
    p.add_argument("--query", required=True, help="query JSON file")
    p.add_argument("--event", required=True, help="event id")
    p.add_argument("--k", type=int, default=None, help="top-k (default from config)")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("summarize", help="summarize the top-ranked messages")
    _add_common(p)
    p.add_argument("--query", required=True, help="query JSON file")
    p.add_argument("--event", required=True, help="event id")
    p.add_argument("--mode", choices=("regular", "diversified"), default="regular")
    p.add_argument("--budget", type=int, default=None, help="token budget")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("evaluate", help="run a cross-validation harness")
    _add_common(p)
    p.add_argument("--protocol", choices=("lolo", "loeo"), required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="start the HTTP JSON service")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", default=None, help="static UI directory to mount at /ui")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc.parser.format_usage(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (BackendError, OSError) as exc:
        print(f"backend/io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
