"""HTTP surface over the session store.

Endpoints (all JSON unless noted):

    POST /sessions                      multipart PDF upload, ?autotag=true
    GET  /sessions/{id}
    GET  /sessions/{id}/steps/{1..8}
    PUT  /sessions/{id}/steps/{1..8}    {"expected_revision": n, "payload": {...}}
    POST /sessions/{id}/export          -> application/pdf
    GET  /sessions/{id}/pages/{n}/geometry
    GET  /sessions/{id}/tagmap

Conflicts are 409, validation problems 422, unknown ids 404, bad payloads 400.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, File, Query, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..mathtext import LatexError
from ..pdfio import MalformedPdf
from ..regions import IndexOutOfRange, OpsAlreadyTagged, UnknownRegion
from .store import (
    BadStepPayload, RevisionConflict, SessionStore, UnknownSession,
    ValidationFailed,
)

API_VERSION = 1


def create_app(data_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    store = SessionStore(data_dir)
    app = FastAPI(title="pdfremedy session service", version=str(API_VERSION))
    app.state.store = store

    @app.exception_handler(UnknownSession)
    async def _unknown(request: Request, exc: UnknownSession):
        return JSONResponse({"error": f"unknown session or page: {exc}"}, status_code=404)

    @app.exception_handler(UnknownRegion)
    async def _unknown_region(request: Request, exc: UnknownRegion):
        return JSONResponse({"error": f"unknown region: {exc}"}, status_code=404)

    @app.exception_handler(RevisionConflict)
    async def _conflict(request: Request, exc: RevisionConflict):
        return JSONResponse(
            {"error": str(exc), "revision": exc.actual}, status_code=409
        )

    @app.exception_handler(ValidationFailed)
    async def _invalid(request: Request, exc: ValidationFailed):
        return JSONResponse(
            {"error": "validation failed", "problems": exc.problems}, status_code=422
        )

    @app.exception_handler(MalformedPdf)
    async def _malformed(request: Request, exc: MalformedPdf):
        return JSONResponse({"error": f"malformed PDF: {exc}"}, status_code=422)

    for bad in (BadStepPayload, OpsAlreadyTagged, IndexOutOfRange, LatexError, ValueError):
        @app.exception_handler(bad)
        async def _bad(request: Request, exc: Exception):
            return JSONResponse({"error": str(exc)}, status_code=400)

    @app.post("/sessions", status_code=201)
    async def create_session(
        file: UploadFile = File(...), autotag: bool = Query(default=True)
    ):
        pdf_bytes = await file.read()
        session = store.create(pdf_bytes, auto=autotag)
        return session.info()

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        return store.get(session_id).info()

    @app.get("/sessions/{session_id}/steps/{step}")
    def get_step(session_id: str, step: int):
        return store.step_view(session_id, step)

    @app.put("/sessions/{session_id}/steps/{step}")
    def put_step(session_id: str, step: int, body: dict):
        expected = body.get("expected_revision")
        if not isinstance(expected, int):
            raise BadStepPayload("expected_revision (int) is required")
        return store.put_step(session_id, step, body.get("payload", {}), expected)

    @app.post("/sessions/{session_id}/export")
    def export(session_id: str):
        pdf = store.export(session_id)
        return Response(
            content=pdf, media_type="application/pdf",
            headers={"Content-Disposition": "attachment; filename=tagged.pdf"},
        )

    @app.get("/sessions/{session_id}/pages/{page_index}/geometry")
    def geometry(session_id: str, page_index: int):
        return store.geometry(session_id, page_index)

    @app.get("/sessions/{session_id}/tagmap")
    def tagmap(session_id: str):
        session = store.get(session_id)
        return {"revision": session.revision, "tagmap": session.tagmap.to_json()}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
