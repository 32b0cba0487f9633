"""HTTP session service: recommendations, explanations, critiquing.

One model loaded at startup, live sessions in memory behind per-session
locks (single writer per session), every state change written through to
a snapshot file so sessions can be replayed.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..critique.core import CritiqueError, CritiqueParams
from ..critique.session import (
    Session,
    read_session_snapshot,
    rerank_after_critique,
    reset_session,
    start_session,
    write_session_snapshot,
)
from ..experiments.pipeline import restore
from ..model.infer import Scorer

ERROR_STATUS = {
    "unknown-entity": 404,
    "no-such-session": 404,
    "redundant-edit": 409,
    "internal": 500,
}
# reasons raised by the critique layer that the API folds into its codes
REASON_TO_CODE = {
    "unknown-entity": "unknown-entity",
    "no-such-session": "no-such-session",
    "redundant-edit": "redundant-edit",
    "bad-index": "unknown-entity",
}


@dataclass
class ServiceConfig:
    checkpoint_path: str
    corpus_dir: str
    host: str = "127.0.0.1"
    port: int = 8571
    topn_default: int = 20
    snapshot_dir: str | None = None
    critique: CritiqueParams = field(default_factory=CritiqueParams)

    def __post_init__(self):
        if self.topn_default < 1:
            raise ValueError("topn_default must be at least 1")


class ServiceState:
    """Model, scorer, and the live session table."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        net, prepared, header = restore(config.checkpoint_path, config.corpus_dir)
        self.net = net
        self.prepared = prepared
        self.scorer = Scorer(net, prepared.tensors, kp_phrases=prepared.vocab.phrases)
        self.keyphrases = [
            {"index": i, "phrase": phrase, "aspect": aspect}
            for i, (phrase, aspect) in enumerate(prepared.vocab.entries)
        ]
        snap = config.snapshot_dir or str(Path(config.checkpoint_path).parent / "sessions")
        self.snapshot_dir = Path(snap)
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.store_lock = threading.Lock()

    def snapshot_path(self, session_id: str) -> Path:
        return self.snapshot_dir / f"{session_id}.jsonl"

    def archive_path(self, session_id: str) -> Path:
        return self.snapshot_dir / f"{session_id}.archive.jsonl"

    def acquire(self, session_id: str):
        with self.store_lock:
            if session_id not in self.sessions:
                raise CritiqueError("no-such-session", f"session {session_id!r} not found")
            return self.sessions[session_id], self.locks[session_id]

    def create(self, user_id: str, n_candidates: int) -> tuple[Session, threading.Lock]:
        session_id = uuid.uuid4().hex
        session = start_session(self.scorer, user_id, n_candidates=n_candidates,
                                session_id=session_id)
        lock = threading.Lock()
        with self.store_lock:
            self.sessions[session_id] = session
            self.locks[session_id] = lock
        return session, lock

    def restore_session(self, snapshot_path) -> Session:
        """Rebuild a live session from its snapshot file.

        Base latents are recomputed from the model (they are a pure
        function of user and candidates); current latents and the event
        history come from the snapshot.
        """
        import numpy as np

        snap = read_session_snapshot(snapshot_path)
        meta = snap["meta"]
        session = start_session(self.scorer, meta["user_id"],
                                session_id=meta["session_id"], generate_text=False)
        keep = np.asarray(meta["candidate_rows"], dtype=np.int64)
        pos_of = {int(row): i for i, row in enumerate(session.candidate_rows.tolist())}
        positions = np.asarray([pos_of[int(r)] for r in keep], dtype=np.int64)
        session.candidate_rows = keep
        session.base_latents = session.base_latents[positions]
        latents = np.stack([snap["latents"][int(r)] for r in keep])
        session.latents = latents.astype(self.net.dtype)
        from ..critique.session import CritiqueEvent, _score_and_rank

        session.history = [
            CritiqueEvent(int(e["keyphrase_index"]), e["action"], float(e["timestamp"]))
            for e in snap["events"]
        ]
        _score_and_rank(self.scorer, session, generate_text=True)
        with self.store_lock:
            self.sessions[session.session_id] = session
            self.locks[session.session_id] = threading.Lock()
        return session


class CreateSessionBody(BaseModel):
    user_id: str
    n_candidates: int | None = Field(default=None, ge=1)


class EditBody(BaseModel):
    keyphrase: int = Field(ge=0)
    action: Literal["add", "remove"]


class CritiqueBody(BaseModel):
    edits: list[EditBody]


def _item_payload(state: ServiceState, session: Session, pos: int) -> dict:
    bits = session.explanation_bits[pos]
    chips = [
        {**chip, "on": bool(bits[chip["index"]] > 0)}
        for chip in state.keyphrases
    ]
    item = {
        "item_id": state.prepared.tensors.items[int(session.candidate_rows[pos])],
        "score": float(session.scores[pos]),
        "keyphrases": chips,
    }
    if session.last_traces is not None:
        trace = session.last_traces[pos]
        item["converged"] = bool(trace.converged)
        item["iterations"] = int(trace.iterations)
    return item


def _session_payload(state: ServiceState, session: Session) -> dict:
    vocab = state.prepared.token_vocab
    return {
        "session_id": session.session_id,
        "user_id": session.user_id,
        "items": [_item_payload(state, session, int(pos)) for pos in session.ranking],
        "justification": " ".join(vocab.decode(session.justification)),
        "history": [event.as_dict() for event in session.history],
        "convergence": session.convergence_summary(),
    }


def _error_response(code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=ERROR_STATUS[code],
                        content={"code": code, "message": message})


def create_app(config: ServiceConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="xrec service")
    app.state.xrec = state

    @app.exception_handler(CritiqueError)
    async def on_critique_error(request: Request, exc: CritiqueError):
        code = REASON_TO_CODE.get(exc.reason, "internal")
        return _error_response(code, str(exc))

    @app.exception_handler(Exception)
    async def on_internal_error(request: Request, exc: Exception):
        return _error_response("internal", f"{type(exc).__name__}: {exc}")

    @app.get("/health")
    def health():
        ct = state.prepared.tensors
        return {
            "status": "ok",
            "users": len(ct.users),
            "items": len(ct.items),
            "keyphrases": len(state.keyphrases),
            "sessions": len(state.sessions),
        }

    @app.get("/keyphrases")
    def keyphrases():
        return {"keyphrases": state.keyphrases}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        n = body.n_candidates or config.topn_default
        session, lock = state.create(body.user_id, n)
        with lock:
            write_session_snapshot(state.snapshot_path(session.session_id), session)
            return _session_payload(state, session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session, lock = state.acquire(session_id)
        with lock:
            return _session_payload(state, session)

    @app.post("/sessions/{session_id}/critique")
    def critique(session_id: str, body: CritiqueBody):
        session, lock = state.acquire(session_id)
        edits = [(edit.keyphrase, edit.action) for edit in body.edits]
        with lock:
            rerank_after_critique(state.scorer, session, edits, config.critique)
            write_session_snapshot(state.snapshot_path(session.session_id), session)
            return _session_payload(state, session)

    @app.post("/sessions/{session_id}/reset")
    def reset(session_id: str):
        session, lock = state.acquire(session_id)
        with lock:
            snapshot = state.snapshot_path(session.session_id)
            if snapshot.exists():
                with open(state.archive_path(session.session_id), "a", encoding="utf-8") as fh:
                    fh.write(snapshot.read_text(encoding="utf-8"))
            reset_session(state.scorer, session)
            write_session_snapshot(snapshot, session)
            return _session_payload(state, session)

    return app


def run_service(config: ServiceConfig):
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
