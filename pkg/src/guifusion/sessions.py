"""Reporter sessions: the interactive step-building flow over a ripped app.

A session owns a mutable step history while open; every mutation is
validated against the live suggestion set (unless the reporter explicitly
overrides), persisted to the store journal, and answered with the next
suggestions. Mutations on one session are serialized by a per-session
lock; distinct sessions never contend.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    EmptyHistoryError,
    HistoryHitsCrashError,
    InvalidStepError,
    SessionClosedError,
    UnknownSessionError,
)
from .appmodel import ACTIONS
from .flow import Step, Suggestion, suggest_next
from .reporting import BugReport, assemble_report
from .ripper import EventToken
from .store import Store

STATUS_OPEN = "open"
STATUS_FINALIZED = "finalized"
STATUS_ABANDONED = "abandoned"


@dataclass
class ReporterSession:
    session_id: str
    app_id: str
    version: str
    status: str = STATUS_OPEN
    history: list[Step] = field(default_factory=list)
    report_id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "app_id": self.app_id,
            "version": self.version,
            "status": self.status,
            "report_id": self.report_id,
            "history": [step.to_dict() for step in self.history],
        }

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "ReporterSession":
        return ReporterSession(
            session_id=raw["session_id"],
            app_id=raw["app_id"],
            version=raw["version"],
            status=raw["status"],
            report_id=raw.get("report_id"),
            history=[Step.from_dict(s) for s in raw["history"]],
        )


@dataclass
class SuggestionOutcome:
    """What the reporter sees after a session read or mutation: either the
    next suggestions, or the name of the crash the history just ran into."""

    suggestion: Suggestion | None
    crash: str | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "suggestion": self.suggestion.to_dict() if self.suggestion else None,
            "crash": self.crash,
        }


class SessionManager:
    def __init__(self, store: Store):
        self.store = store
        self.sessions: dict[str, ReporterSession] = {
            record["session_id"]: ReporterSession.from_dict(record)
            for record in store.load_session_records()
        }
        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {
            session_id: threading.Lock() for session_id in self.sessions
        }

    # ------------------------------------------------------------- lookups

    def get(self, session_id: str) -> ReporterSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"no session with id {session_id}")
        return session

    def _lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks[session_id]

    def _require_open(self, session: ReporterSession) -> None:
        if session.status != STATUS_OPEN:
            raise SessionClosedError(
                f"session {session.session_id} is {session.status}"
            )

    def _outcome(self, session: ReporterSession) -> SuggestionOutcome:
        bundle = self.store.bundle(session.app_id, session.version)
        try:
            suggestion = suggest_next(
                session.history, bundle.efg, bundle.ngram, bundle.universe
            )
        except HistoryHitsCrashError as exc:
            return SuggestionOutcome(suggestion=None, crash=exc.exception_name)
        return SuggestionOutcome(suggestion=suggestion, crash=None)

    # ----------------------------------------------------------- operations

    def create_session(self, app_id: str, version: str) -> ReporterSession:
        self.store.bundle(app_id, version)  # raises UnknownApp when missing
        with self._registry_lock:
            session_id = self.store.next_session_id()
            session = ReporterSession(session_id=session_id, app_id=app_id, version=version)
            self.sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
            self.store.save_session_record(session_id, session.to_dict())
        return session

    def get_suggestions(self, session_id: str) -> SuggestionOutcome:
        return self._outcome(self.get(session_id))

    def submit_step(
        self,
        session_id: str,
        action: str,
        component_id: str,
        input_text: str | None = None,
        note: str | None = None,
        override: bool = False,
    ) -> SuggestionOutcome:
        session = self.get(session_id)
        with self._lock(session_id):
            self._require_open(session)
            if action not in ACTIONS:
                raise InvalidStepError(f"unknown action '{action}'")
            if (action == "type") != (input_text is not None):
                raise InvalidStepError(
                    "input_text is required for 'type' steps and forbidden otherwise"
                )
            bundle = self.store.bundle(session.app_id, session.version)
            if component_id not in bundle.universe:
                raise InvalidStepError(
                    f"component '{component_id}' does not exist in {session.app_id}"
                )
            token = EventToken(action, component_id)
            if not override:
                outcome = self._outcome(session)
                if outcome.suggestion is None:
                    raise InvalidStepError(
                        "history already ends in a crash; finalize or undo"
                    )
                if token not in outcome.suggestion.pairs():
                    raise InvalidStepError(
                        f"step {token.text} was not offered; resubmit with "
                        "override to record it anyway"
                    )
            session.history.append(
                Step(
                    ordinal=len(session.history) + 1,
                    event=token,
                    input_text=input_text,
                    note=note,
                    override=override,
                )
            )
            self.store.save_session_record(session_id, session.to_dict())
            return self._outcome(session)

    def undo_last_step(self, session_id: str) -> SuggestionOutcome:
        session = self.get(session_id)
        with self._lock(session_id):
            self._require_open(session)
            if not session.history:
                raise EmptyHistoryError("no steps to undo")
            session.history.pop()
            self.store.save_session_record(session_id, session.to_dict())
            return self._outcome(session)

    def finalize(
        self, session_id: str, title: str, device: str, description: str
    ) -> BugReport:
        session = self.get(session_id)
        with self._lock(session_id):
            self._require_open(session)
            if not session.history:
                raise EmptyHistoryError("cannot finalize a session with no steps")
            bundle = self.store.bundle(session.app_id, session.version)
            with self._registry_lock:
                report_id = self.store.next_report_id()
                report = assemble_report(
                    title=title,
                    device=device,
                    description=description,
                    steps=session.history,
                    efg=bundle.efg,
                    universe=bundle.universe,
                    report_id=report_id,
                    created_at=self.store.clock(),
                )
                self.store.save_report(report)
            session.status = STATUS_FINALIZED
            session.report_id = report.report_id
            self.store.save_session_record(session_id, session.to_dict())
            return report

    def abandon(self, session_id: str) -> ReporterSession:
        session = self.get(session_id)
        with self._lock(session_id):
            self._require_open(session)
            session.status = STATUS_ABANDONED
            self.store.save_session_record(session_id, session.to_dict())
            return session
