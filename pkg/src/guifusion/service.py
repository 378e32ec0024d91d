"""HTTP facade over the store, sessions, replay, dedup and triage machinery.

Every endpoint answers the exact payload the underlying module computes;
the service only adds ids, envelopes and links. Errors use one body shape,
``{"error": <code>, "message": <text>}``, with 404 for missing things and
400 for bad input.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .canonical import read_json
from .errors import (
    GuiFusionError,
    MissingOwnershipMapError,
    NOT_FOUND_ERRORS,
    UnknownAppError,
)
from .maintenance import SimilarityConfig, report_similarity
from .reporting import render_report, replay_report
from .maintenance import triage_report
from .sessions import SessionManager
from .store import Store


class CreateSessionBody(BaseModel):
    app_id: str
    version: str


class SubmitStepBody(BaseModel):
    action: str
    component: str
    input_text: str | None = None
    note: str | None = None
    override: bool = False


class FinalizeBody(BaseModel):
    title: str
    device: str
    description: str


class ReplayBody(BaseModel):
    version: str


def create_app(store: Store, ui_dir: Path | str | None = None) -> FastAPI:
    app = FastAPI(title="guifusion", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions = SessionManager(store)

    @app.exception_handler(GuiFusionError)
    async def domain_error_handler(_request: Request, exc: GuiFusionError):
        status = 404 if isinstance(exc, NOT_FOUND_ERRORS) else 400
        return JSONResponse(
            status_code=status, content={"error": exc.code, "message": exc.message}
        )

    def envelope(session_id: str) -> dict:
        session = sessions.get(session_id)
        outcome = sessions.get_suggestions(session_id)
        return {"session": session.to_dict(), **outcome.to_dict()}

    # ----------------------------------------------------------- sessions

    @app.post("/api/sessions")
    def create_session(body: CreateSessionBody):
        session = sessions.create_session(body.app_id, body.version)
        return envelope(session.session_id)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return sessions.get(session_id).to_dict()

    @app.get("/api/sessions/{session_id}/suggestions")
    def get_suggestions(session_id: str):
        return envelope(session_id)

    @app.post("/api/sessions/{session_id}/steps")
    def submit_step(session_id: str, body: SubmitStepBody):
        outcome = sessions.submit_step(
            session_id,
            action=body.action,
            component_id=body.component,
            input_text=body.input_text,
            note=body.note,
            override=body.override,
        )
        return {"session": sessions.get(session_id).to_dict(), **outcome.to_dict()}

    @app.delete("/api/sessions/{session_id}/steps/last")
    def undo_last_step(session_id: str):
        outcome = sessions.undo_last_step(session_id)
        return {"session": sessions.get(session_id).to_dict(), **outcome.to_dict()}

    @app.post("/api/sessions/{session_id}/finalize")
    def finalize(session_id: str, body: FinalizeBody):
        report = sessions.finalize(
            session_id, title=body.title, device=body.device, description=body.description
        )
        return {"report_id": report.report_id, "report": report.to_dict()}

    @app.delete("/api/sessions/{session_id}")
    def abandon(session_id: str):
        return sessions.abandon(session_id).to_dict()

    # ----------------------------------------------------------- apps

    @app.get("/api/apps")
    def list_apps():
        return [
            {"app_id": app_id, "version": version}
            for app_id, version in store.list_apps()
        ]

    # ----------------------------------------------------------- reports

    @app.get("/api/reports")
    def list_reports():
        return [
            {
                "report_id": r.report_id,
                "title": r.title,
                "app_id": r.app_id,
                "app_version": r.app_version,
                "created_at": r.created_at,
                "step_count": len(r.steps),
            }
            for r in store.list_reports()
        ]

    @app.get("/api/reports/{report_id}")
    def get_report(report_id: str, format: str = "json"):
        report = store.load_report(report_id)
        if format == "json":
            return Response(
                render_report(report, "json"), media_type="application/json"
            )
        if format in ("md", "markdown"):
            return Response(
                render_report(report, "markdown"), media_type="text/markdown"
            )
        if format == "html":
            return Response(render_report(report, "html"), media_type="text/html")
        raise GuiFusionError(f"unknown format '{format}'")

    @app.post("/api/reports/{report_id}/replay")
    def replay(report_id: str, body: ReplayBody):
        report = store.load_report(report_id)
        if not store.has_app(report.app_id, body.version):
            raise UnknownAppError(
                f"no ripped database for {report.app_id} {body.version}"
            )
        bundle = store.bundle(report.app_id, body.version)
        return replay_report(report, bundle.model).to_dict()

    @app.get("/api/reports/{report_id}/duplicates")
    def duplicates(report_id: str, tau: float = 0.8):
        report = store.load_report(report_id)
        try:
            cfg = SimilarityConfig(tau=tau)
        except ValueError as exc:
            raise GuiFusionError(str(exc)) from exc
        candidates = []
        for other in store.list_reports():
            if other.report_id == report.report_id or other.app_id != report.app_id:
                continue
            score = report_similarity(report, other, cfg)
            candidates.append(
                {
                    "report_id": other.report_id,
                    "score": score,
                    "duplicate": score >= cfg.tau,
                }
            )
        candidates.sort(key=lambda c: (-c["score"], c["report_id"]))
        return {"report_id": report.report_id, "tau": cfg.tau, "candidates": candidates}

    @app.get("/api/reports/{report_id}/triage")
    def triage(report_id: str):
        report = store.load_report(report_id)
        owners_path = store.owners_path()
        if not owners_path.is_file():
            raise MissingOwnershipMapError(f"no ownership map at {owners_path}")
        ranking = triage_report(report, read_json(owners_path))
        return {
            "report_id": report.report_id,
            "ranking": [
                {"developer": developer, "score": score}
                for developer, score in ranking
            ],
        }

    # ----------------------------------------------------------- screenshots

    @app.get("/api/screenshots/{shot_id}.svg")
    def screenshot(shot_id: str):
        return Response(store.find_screenshot(shot_id), media_type="image/svg+xml")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(store: Store, port: int, host: str = "127.0.0.1",
          ui_dir: Path | str | None = None) -> None:
    """Run the API with uvicorn; blocks until interrupted."""
    import uvicorn

    uvicorn.run(create_app(store, ui_dir=ui_dir), host=host, port=port, log_level="warning")
