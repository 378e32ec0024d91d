"""Command-line entry points.

Exit codes: 0 on success, 1 for usage errors, 2 for data errors (bad model
documents, missing databases, malformed reports). The GUIFUSION_DB
environment variable, when set, overrides any --db/--out flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .appmodel import parse_app_model
from .canonical import canonical_json, read_json, write_json
from .errors import EmptyOwnershipMapError, GuiFusionError
from .maintenance import SimilarityConfig, detect_duplicates, triage_report
from .reporting import (
    BugReport,
    DfsComplete,
    NgramWeighted,
    UniformRandom,
    crawl_for_crashes,
    render_report,
    replay_report,
)
from .ripper import RipConfig
from .store import Store

ENV_DB = "GUIFUSION_DB"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


class DataError(Exception):
    pass


def _store_root(flag_value: str | None) -> Path:
    env = os.environ.get(ENV_DB)
    if env:
        return Path(env)
    if flag_value is None:
        raise DataError(f"no store directory: pass --db or set {ENV_DB}")
    return Path(flag_value)


def _load_model(path: str):
    model_path = Path(path)
    if not model_path.is_file():
        raise DataError(f"model file not found: {path}")
    return parse_app_model(model_path.read_text(encoding="utf-8"))


def _load_report_file(path: str) -> BugReport:
    report_path = Path(path)
    if not report_path.is_file():
        raise DataError(f"report file not found: {path}")
    try:
        return BugReport.from_dict(read_json(report_path))
    except (KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed report file {path}: {exc}") from exc


def _cmd_rip(args) -> int:
    model = _load_model(args.model)
    store = Store(_store_root(args.out))
    config = RipConfig(
        max_events=args.max_events, max_depth=args.max_depth, seed=args.seed
    )
    target = store.rip_app(model, config)
    bundle = store.bundle(model.app_id, model.version)
    print(
        f"ripped {model.app_id} {model.version}: "
        f"{len(bundle.efg.states)} states, {len(bundle.efg.edges)} edges, "
        f"truncated={str(bundle.efg.truncated).lower()}"
    )
    print(f"database: {target}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    store = Store(_store_root(args.db))
    if not store.list_apps():
        print(f"warning: no ripped apps under {store.root}", file=sys.stderr)
    try:
        serve(store, port=args.port, host=args.host, ui_dir=args.ui)
    except OSError as exc:
        raise DataError(f"cannot bind {args.host}:{args.port}: {exc}") from exc
    return 0


def _cmd_report_render(args) -> int:
    store = Store(_store_root(args.db))
    report = store.load_report(args.report_id)
    fmt = {"md": "markdown", "markdown": "markdown", "html": "html", "json": "json"}[
        args.format
    ]
    sys.stdout.write(render_report(report, fmt))
    return 0


def _cmd_replay(args) -> int:
    report = _load_report_file(args.report)
    model = _load_model(args.model)
    result = replay_report(report, model)
    sys.stdout.write(canonical_json(result.to_dict()))
    return 0


def _cmd_crashes(args) -> int:
    model = _load_model(args.model)
    if args.strategy == "dfs":
        strategy = DfsComplete()
    elif args.strategy == "random":
        strategy = UniformRandom(seed=args.seed, budget=args.budget)
    else:
        strategy = NgramWeighted(seed=args.seed, budget=args.budget)
    reports = crawl_for_crashes(model, strategy)
    if args.out:
        out_dir = Path(args.out)
        for report in reports:
            write_json(out_dir / f"{report.report_id}.json", report.to_dict())
    sys.stdout.write(canonical_json([r.to_dict() for r in reports]))
    return 0


def _cmd_dedup(args) -> int:
    store = Store(_store_root(args.db))
    corpus = store.list_reports()
    by_app: dict[str, list[BugReport]] = {}
    for report in corpus:
        by_app.setdefault(report.app_id, []).append(report)
    cfg = SimilarityConfig(tau=args.tau)
    merged = {"tau": cfg.tau, "pairs": [], "clusters": []}
    for app_id in sorted(by_app):
        output = detect_duplicates(by_app[app_id], cfg)
        merged["pairs"].extend(p.to_dict() for p in output.pairs)
        merged["clusters"].extend(output.clusters)
    write_json(store.root / "duplicates.json", merged)
    sys.stdout.write(canonical_json(merged))
    return 0


def _cmd_triage(args) -> int:
    report = _load_report_file(args.report)
    owners_path = Path(args.owners)
    if not owners_path.is_file():
        raise DataError(f"owners file not found: {args.owners}")
    owners = read_json(owners_path)
    ranking = triage_report(report, owners)
    sys.stdout.write(
        canonical_json([{"developer": dev, "score": score} for dev, score in ranking])
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="guifusion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_rip = sub.add_parser("rip", help="explore a model and write its database")
    p_rip.add_argument("model", help="path to an app-model JSON document")
    p_rip.add_argument("--out", help="store root directory")
    p_rip.add_argument("--max-events", type=int, default=10_000)
    p_rip.add_argument("--max-depth", type=int, default=50)
    p_rip.add_argument("--seed", type=int, default=0)
    p_rip.set_defaults(func=_cmd_rip)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--db", help="store root directory")
    p_serve.add_argument("--port", type=int, default=8600)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", help="directory of built frontend assets to serve at /")
    p_serve.set_defaults(func=_cmd_serve)

    p_report = sub.add_parser("report", help="report utilities")
    report_sub = p_report.add_subparsers(dest="report_command", required=True)
    p_render = report_sub.add_parser("render", help="render a stored report")
    p_render.add_argument("report_id")
    p_render.add_argument("--format", choices=("md", "markdown", "html", "json"), default="md")
    p_render.add_argument("--db", help="store root directory")
    p_render.set_defaults(func=_cmd_report_render)

    p_replay = sub.add_parser("replay", help="replay a report file against a model")
    p_replay.add_argument("report", help="path to a report JSON file")
    p_replay.add_argument("model", help="path to an app-model JSON document")
    p_replay.set_defaults(func=_cmd_replay)

    p_crashes = sub.add_parser("crashes", help="crawl a model for crash reports")
    p_crashes.add_argument("model", help="path to an app-model JSON document")
    p_crashes.add_argument("--strategy", choices=("dfs", "random", "ngram"), default="dfs")
    p_crashes.add_argument("--budget", type=int, default=1000)
    p_crashes.add_argument("--seed", type=int, default=0)
    p_crashes.add_argument("--out", help="directory to write the crash reports into")
    p_crashes.set_defaults(func=_cmd_crashes)

    p_dedup = sub.add_parser("dedup", help="detect duplicate reports in a store")
    p_dedup.add_argument("--db", help="store root directory")
    p_dedup.add_argument("--tau", type=float, default=0.8)
    p_dedup.set_defaults(func=_cmd_dedup)

    p_triage = sub.add_parser("triage", help="rank developers for a report")
    p_triage.add_argument("report", help="path to a report JSON file")
    p_triage.add_argument("--owners", required=True, help="path to owners.json")
    p_triage.set_defaults(func=_cmd_triage)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, GuiFusionError, EmptyOwnershipMapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
