"""File-backed store: ripped app databases, reports, and session journal.

Layout under the store root:

    db/<app_id>/<version>/model.json     app model, canonical form
    db/<app_id>/<version>/efg.json       event-flow graph
    db/<app_id>/<version>/trace.json     exploration trace (one segment per launch)
    db/<app_id>/<version>/ngram.json     n-gram trained from the trace
    db/<app_id>/<version>/states/<fingerprint>.json
    db/<app_id>/<version>/screens/<screenshot-id>.svg
    reports/<report-id>.json (plus .md / .html renders)
    sessions/<session-id>.json
    owners.json                          optional, user-provided
    duplicates.json                      written by duplicate detection

Everything is canonical JSON, so equal inputs always produce byte-identical
directories. Screenshot ids are content digests; session and report ids are
monotonic counters derived from the existing files.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .appmodel import AppModel, ComponentRecord, parse_app_model, universe_by_id
from .canonical import canonical_json, read_json, write_json, write_text
from .errors import UnknownAppError, UnknownReportError, UnknownScreenshotError
from .flow import NGramModel, train_ngram_segments, uniform_ngram
from .reporting import BugReport, render_report
from .ripper import EventFlowGraph, RipConfig, RipResult, rip

_COUNTER_RE = re.compile(r"^[rs]-(\d{6})$")


def utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class AppBundle:
    """Everything the suggestion and replay machinery needs for one ripped
    app version."""

    model: AppModel
    efg: EventFlowGraph
    ngram: NGramModel
    universe: dict[str, ComponentRecord]


class Store:
    def __init__(self, root: Path | str, clock: Callable[[], str] = utc_now):
        self.root = Path(root)
        self.clock = clock
        self._bundles: dict[tuple[str, str], AppBundle] = {}

    # ------------------------------------------------------------------ db

    def db_dir(self, app_id: str, version: str) -> Path:
        return self.root / "db" / app_id / version

    def has_app(self, app_id: str, version: str) -> bool:
        return (self.db_dir(app_id, version) / "efg.json").is_file()

    def list_apps(self) -> list[tuple[str, str]]:
        db = self.root / "db"
        if not db.is_dir():
            return []
        return sorted(
            (app.name, version.name)
            for app in db.iterdir()
            if app.is_dir()
            for version in app.iterdir()
            if (version / "efg.json").is_file()
        )

    def write_rip(self, model: AppModel, result: RipResult) -> Path:
        """Persist a rip session as the database for (app_id, version)."""
        target = self.db_dir(model.app_id, model.version)
        write_text(target / "model.json", canonical_json(model.to_dict()))
        write_json(target / "efg.json", result.efg.to_dict())
        write_json(target / "trace.json", {"segments": result.trace_texts()})
        tokens = result.efg.tokens()
        if any(result.trace):
            ngram = train_ngram_segments(result.trace, vocabulary=tokens)
        else:
            ngram = uniform_ngram(tokens)
        write_json(target / "ngram.json", ngram.to_dict())
        for fingerprint, state in sorted(result.efg.states.items()):
            write_json(target / "states" / f"{fingerprint}.json", state.to_dict())
        for shot_id, svg in sorted(result.screenshot_documents.items()):
            write_text(target / "screens" / f"{shot_id}.svg", svg)
        self._bundles.pop((model.app_id, model.version), None)
        return target

    def rip_app(self, model: AppModel, config: RipConfig | None = None) -> Path:
        return self.write_rip(model, rip(model, config))

    def bundle(self, app_id: str, version: str) -> AppBundle:
        key = (app_id, version)
        if key in self._bundles:
            return self._bundles[key]
        target = self.db_dir(app_id, version)
        if not (target / "efg.json").is_file():
            raise UnknownAppError(f"no ripped database for {app_id} {version}")
        model = parse_app_model((target / "model.json").read_text(encoding="utf-8"))
        efg = EventFlowGraph.from_dict(read_json(target / "efg.json"))
        ngram = NGramModel.from_dict(read_json(target / "ngram.json"))
        bundle = AppBundle(
            model=model, efg=efg, ngram=ngram, universe=universe_by_id(model)
        )
        self._bundles[key] = bundle
        return bundle

    def find_screenshot(self, shot_id: str) -> str:
        """Locate a screenshot by content id across every app database."""
        if not re.fullmatch(r"[0-9a-f]{16}", shot_id):
            raise UnknownScreenshotError(f"malformed screenshot id: {shot_id!r}")
        for app_id, version in self.list_apps():
            candidate = self.db_dir(app_id, version) / "screens" / f"{shot_id}.svg"
            if candidate.is_file():
                return candidate.read_text(encoding="utf-8")
        raise UnknownScreenshotError(f"no screenshot with id {shot_id}")

    # -------------------------------------------------------------- reports

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    def next_report_id(self) -> str:
        return f"r-{self._next_counter(self.reports_dir):06d}"

    def save_report(self, report: BugReport) -> None:
        base = self.reports_dir / report.report_id
        write_json(base.with_suffix(".json"), report.to_dict())
        write_text(base.with_suffix(".md"), render_report(report, "markdown"))
        write_text(base.with_suffix(".html"), render_report(report, "html"))

    def load_report(self, report_id: str) -> BugReport:
        path = self.reports_dir / f"{report_id}.json"
        if not path.is_file():
            raise UnknownReportError(f"no report with id {report_id}")
        return BugReport.from_dict(read_json(path))

    def list_reports(self) -> list[BugReport]:
        if not self.reports_dir.is_dir():
            return []
        return [
            BugReport.from_dict(read_json(path))
            for path in sorted(self.reports_dir.glob("r-*.json"))
        ]

    # -------------------------------------------------------------- sessions

    @property
    def sessions_dir(self) -> Path:
        return self.root / "sessions"

    def next_session_id(self) -> str:
        return f"s-{self._next_counter(self.sessions_dir):06d}"

    def save_session_record(self, session_id: str, record: dict) -> None:
        write_json(self.sessions_dir / f"{session_id}.json", record)

    def load_session_records(self) -> list[dict]:
        if not self.sessions_dir.is_dir():
            return []
        return [read_json(path) for path in sorted(self.sessions_dir.glob("s-*.json"))]

    # -------------------------------------------------------------- misc

    def owners_path(self) -> Path:
        return self.root / "owners.json"

    def _next_counter(self, directory: Path) -> int:
        highest = 0
        if directory.is_dir():
            for path in directory.iterdir():
                match = _COUNTER_RE.match(path.stem)
                if match:
                    highest = max(highest, int(match.group(1)))
        return highest + 1
