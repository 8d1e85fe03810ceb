"""HTTP/JSON surface over the engine.

Every non-2xx body is an ApiError {code, message, detail}. Stateless
endpoints share read-only engine objects; agent state is per session
id and persists under the configured session root.
"""

from __future__ import annotations

import json
import uuid
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .agent import (AgentSession, Attachment, CompletionBackend,
                    HttpBackend, StubBackend, create_session, run_turn)
from .align import result_to_json
from .audio import load_wav
from .config import AppConfig
from .errors import BackendTimeout, BarlineError, ModuleFailure
from .evaluate import build_report, evaluate_performance
from .events import notes_from_json, notes_to_json
from .library import (LibraryIndex, index_library, match_implicit,
                      search_explicit)
from .pipeline import (audio_alignment, performance_from_bytes,
                       score_from_bytes, symbolic_alignment)


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str,
                 detail: Optional[str] = None) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


def _api_error(status: int, code: str, message: str,
               detail: Optional[str] = None) -> JSONResponse:
    body = {"code": code, "message": message, "detail": detail}
    return JSONResponse(status_code=status, content=body)


def _make_backend(config: AppConfig) -> CompletionBackend:
    if config.llm_url:
        return HttpBackend(url=config.llm_url, api_key=config.llm_key,
                           model=config.llm_model or "default",
                           timeout=config.llm_timeout)
    return StubBackend()


def create_app(config: AppConfig = AppConfig(),
               backend: Optional[CompletionBackend] = None,
               library: Optional[LibraryIndex] = None) -> FastAPI:
    app = FastAPI(title="barline", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    if library is None and config.library_path:
        library = index_library(config.library_path)
    app.state.config = config
    app.state.library = library
    app.state.backend = backend or _make_backend(config)
    app.state.sessions: Dict[str, AgentSession] = {}
    upload_cap = config.max_upload_mb * 1024 * 1024

    @app.exception_handler(ApiException)
    async def handle_api(request: Request, exc: ApiException):
        return _api_error(exc.status, exc.code, exc.message, exc.detail)

    @app.exception_handler(BackendTimeout)
    async def handle_timeout(request: Request, exc: BackendTimeout):
        return _api_error(504, "backend_timeout", str(exc))

    @app.exception_handler(BarlineError)
    async def handle_engine(request: Request, exc: BarlineError):
        code = "module_failure" if isinstance(exc, ModuleFailure) \
            else "invalid_input"
        return _api_error(400, code, str(exc))

    @app.exception_handler(ValueError)
    async def handle_value(request: Request, exc: ValueError):
        return _api_error(400, "invalid_input", str(exc))

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request,
                                exc: RequestValidationError):
        return _api_error(400, "invalid_input", "request validation failed",
                          detail=str(exc.errors()))

    async def _read_upload(upload: UploadFile) -> bytes:
        data = await upload.read()
        if len(data) > upload_cap:
            raise ApiException(413, "payload_too_large",
                               f"upload exceeds {config.max_upload_mb} MB")
        return data

    def _require_library() -> LibraryIndex:
        if app.state.library is None:
            raise ApiException(400, "no_library",
                               "no library is configured")
        return app.state.library

    def _get_session(session_id: str) -> AgentSession:
        found = app.state.sessions.get(session_id)
        if found is not None:
            return found
        root = Path(config.session_root)
        if (root / "sessions" / session_id / "memory.jsonl").exists():
            session = create_session(root, session_id,
                                     backend=app.state.backend,
                                     library=app.state.library,
                                     tempo_bpm=config.tempo_bpm)
            app.state.sessions[session_id] = session
            return session
        raise ApiException(404, "unknown_session",
                           f"no session {session_id}")

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/transcribe")
    async def transcribe(file: UploadFile = File(...)):
        data = await _read_upload(file)
        notes = performance_from_bytes(data, file.filename or "upload.wav")
        return notes_to_json(notes)

    @app.post("/align")
    async def align(score: UploadFile = File(...),
                    performance: UploadFile = File(...),
                    tempo: float = Form(None),
                    symbolic: bool = Form(False)):
        tempo_bpm = tempo if tempo is not None else config.tempo_bpm
        score_data = await _read_upload(score)
        perf_data = await _read_upload(performance)
        parsed = score_from_bytes(score_data, score.filename or "score")
        perf_name = performance.filename or "performance"
        if perf_name.lower().endswith(".wav") and not symbolic:
            result = audio_alignment(parsed, load_wav(perf_data), tempo_bpm)
        else:
            notes = performance_from_bytes(perf_data, perf_name)
            result = symbolic_alignment(parsed, notes, tempo_bpm)
        return result_to_json(result)

    @app.post("/evaluate")
    async def evaluate(score: UploadFile = File(...),
                       performance: UploadFile = File(...),
                       tempo: float = Form(None)):
        tempo_bpm = tempo if tempo is not None else config.tempo_bpm
        score_data = await _read_upload(score)
        perf_data = await _read_upload(performance)
        parsed = score_from_bytes(score_data, score.filename or "score")
        notes = performance_from_bytes(perf_data,
                                       performance.filename or "performance")
        alignment = symbolic_alignment(parsed, notes, tempo_bpm)
        records, summary = evaluate_performance(parsed, notes, alignment,
                                                tempo_bpm)
        return build_report(parsed.title or "untitled", tempo_bpm,
                            records, summary)

    @app.get("/library/search")
    async def library_search(q: str = Query(...)):
        hits = search_explicit(_require_library(), q)
        return {"hits": [{"entry_id": h.entry_id,
                          "score": h.score, "kind": h.kind}
                         for h in hits]}

    @app.post("/library/match")
    async def library_match(body: List[Dict] = None):
        if not body:
            raise ApiException(400, "invalid_input",
                               "expected a JSON array of notes")
        notes = notes_from_json(body)
        hits = match_implicit(_require_library(), notes)
        return {"hits": [{"entry_id": h.entry_id,
                          "score": h.score, "kind": h.kind}
                         for h in hits]}

    @app.post("/agent/session")
    async def agent_session():
        session_id = uuid.uuid4().hex
        session = create_session(Path(config.session_root), session_id,
                                 backend=app.state.backend,
                                 library=app.state.library,
                                 tempo_bpm=config.tempo_bpm)
        app.state.sessions[session_id] = session
        return {"session_id": session_id}

    @app.post("/agent/message")
    async def agent_message(session_id: str = Form(...),
                            text: str = Form(...),
                            files: List[UploadFile] = File(None)):
        session = _get_session(session_id)
        attachments = []
        if files:
            staging = Path(config.session_root) / "sessions" / \
                session_id / "attachments"
            staging.mkdir(parents=True, exist_ok=True)
            for upload in files:
                data = await _read_upload(upload)
                name = Path(upload.filename or "upload").name
                target = staging / name
                target.write_bytes(data)
                attachments.append(Attachment.from_path(str(target)))
        out = run_turn(session, text, attachments)
        return {"response": out["response"], "trace": out["trace"],
                "intent": out["intent"], "turn": out["turn"]}

    @app.get("/agent/memory")
    async def agent_memory(session_id: str = Query(...)):
        session = _get_session(session_id)
        return {"entries": [{"turn": e.turn, "kind": e.kind,
                             "payload": e.payload,
                             "timestamp": e.timestamp}
                            for e in session.memory.entries]}

    return app


def serve(config: AppConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
