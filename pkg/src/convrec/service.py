"""HTTP service exposing interactive chat sessions over the same turn engine
the benchmark uses.

Only the feedback source and the acceptance judge differ between modes:
``interactive`` sessions use the LLM judge, ``simulated`` sessions carry a
known target title and judge deterministically. A turn is atomic — if any
backend call fails mid-turn, the stored session state is untouched.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

import httpx
from fastapi import FastAPI, HTTPException, Query, Request
from pydantic import BaseModel, Field

from .gateway.backends import RemoteBackend

from .core import Item, SessionState, SessionStatus, is_terminal
from .errors import ConvrecError, InvalidInputError, ReplayMissError, StateError, TransportError
from .evalkit import RunConfig, SystemMode, TurnEngine
from .evalkit.records import profile_to_dict
from .gateway import Gateway
from .simulation import judge_acceptance, judge_acceptance_live

log = logging.getLogger(__name__)
turn_log = logging.getLogger("convrec.turns")

_BACKEND_FAILURES = (TransportError, ReplayMissError)


class CreateSessionBody(BaseModel):
    opening_utterance: str
    mode: str = "interactive"
    config: dict[str, Any] = Field(default_factory=dict)
    # Optional caller-chosen id (handy for scripted backends and tests); must be fresh.
    session_id: str | None = None


class MessageBody(BaseModel):
    utterance: str


@dataclass
class StoredSession:
    session_id: str
    mode: str
    engine: TurnEngine
    state: SessionState
    created_at: str
    lock: threading.Lock = field(default_factory=threading.Lock)


def _run_config_from_overrides(overrides: dict[str, Any]) -> RunConfig:
    allowed = {"system_mode", "max_turns", "fallback_size", "count_fallback_turn"}
    unknown = set(overrides) - allowed - {"target_title"}
    if unknown:
        raise InvalidInputError(f"unknown config overrides: {sorted(unknown)}")
    system_mode = overrides.get("system_mode", "macrs")
    if system_mode not in ("macrs", "single_agent"):
        raise InvalidInputError("interactive sessions support system_mode macrs or single_agent")
    return RunConfig(
        mode=SystemMode(system_mode),
        max_turns=overrides.get("max_turns", 5),
        fallback_size=overrides.get("fallback_size", 10),
        count_fallback_turn=overrides.get("count_fallback_turn", True),
    )


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="convrec", version="0.1.0")
    sessions: dict[str, StoredSession] = {}
    app.state.sessions = sessions
    app.state.gateway = gateway

    def _get(session_id: str) -> StoredSession:
        stored = sessions.get(session_id)
        if stored is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return stored

    def _system_payload(state: SessionState) -> dict:
        turn = state.turns[-1] if state.turns else None
        response = state.pending_system or (turn.system_response if turn else None)
        assert response is not None
        return {"act": response.act.value, "text": response.text, "recommendations": list(response.recommendations)}

    def _debug_payload(stored: StoredSession) -> dict:
        trace = stored.engine._pending_trace or (stored.engine.traces[-1] if stored.engine.traces else {})
        candidates = trace.get("candidates")
        strategy = _latest_strategy(stored.engine.traces, stored.engine._pending_trace)
        suggestions, experiences = None, None
        if stored.state.suggestions is not None:
            s = stored.state.suggestions
            suggestions = {"ask": s.ask, "recommend": s.recommend, "chat": s.chat, "created_at_turn": s.created_at_turn}
        if stored.state.experiences is not None:
            experiences = {"text": stored.state.experiences.text, "created_at_turn": stored.state.experiences.created_at_turn}
        return {
            "candidates": [
                {"act": c.act, "text": c.text, "recommendations": list(c.recommendations)} for c in candidates
            ]
            if candidates
            else None,
            "planner_rationale": trace.get("planner_rationale"),
            "parse_fallback_used": trace.get("parse_fallback_used", False),
            "profile": profile_to_dict(stored.state.profile),
            "suggestions": suggestions,
            "experiences": experiences,
            "why_failed": strategy.get("why_failed") if strategy else None,
        }

    def _exchange(stored: StoredSession, utterance: str, debug: bool) -> dict:
        payload: dict = {
            "session_id": stored.session_id,
            "user_utterance": utterance,
            "system": _system_payload(stored.state),
            "terminal": is_terminal(stored.state),
            "outcome": _outcome(stored.state),
        }
        if debug:
            payload["debug"] = _debug_payload(stored)
        turn_log.info("%s", json.dumps({"session": stored.session_id, "turn": stored.state.completed_turns or stored.state.current_turn_index, "act": payload["system"]["act"], "terminal": payload["terminal"]}, sort_keys=True))
        return payload

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody, debug: int = Query(default=0)) -> dict:
        if body.mode not in ("interactive", "simulated"):
            raise HTTPException(status_code=400, detail="mode must be interactive or simulated")
        if not body.opening_utterance.strip():
            raise HTTPException(status_code=400, detail="opening_utterance must be non-empty")
        try:
            config = _run_config_from_overrides(body.config)
        except (InvalidInputError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

        session_id = body.session_id or uuid.uuid4().hex
        if session_id in sessions:
            raise HTTPException(status_code=400, detail=f"session id {session_id} already exists")
        if body.mode == "simulated":
            target_title = body.config.get("target_title", "")
            if not target_title:
                raise HTTPException(status_code=400, detail="simulated sessions need config.target_title")
            target = Item(id="simulated-target", title=target_title)

            def judge(system_response, feedback, turn_index):
                return judge_acceptance(system_response, target, feedback)

        else:

            def judge(system_response, feedback, turn_index):
                return judge_acceptance_live(
                    system_response, feedback, gateway, session_id=session_id, turn_index=turn_index
                )

        engine = TurnEngine(config, gateway, session_id=session_id, judge=judge)
        try:
            state, _ = engine.open_session(body.opening_utterance)
        except _BACKEND_FAILURES as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        stored = StoredSession(
            session_id=session_id,
            mode=body.mode,
            engine=engine,
            state=state,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        sessions[session_id] = stored
        return _exchange(stored, body.opening_utterance, debug=bool(debug))

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody, debug: int = Query(default=0)) -> dict:
        stored = _get(session_id)
        if not body.utterance.strip():
            raise HTTPException(status_code=400, detail="utterance must be non-empty")
        if not stored.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a message for this session is already in flight")
        try:
            if is_terminal(stored.state):
                raise HTTPException(status_code=409, detail=f"session is terminal ({_outcome(stored.state)})")
            checkpoint = stored.engine.checkpoint()
            try:
                new_state, _ = stored.engine.advance(stored.state, body.utterance)
            except _BACKEND_FAILURES as exc:
                stored.engine.rollback(checkpoint)
                raise HTTPException(status_code=503, detail=str(exc)) from exc
            except StateError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            stored.state = new_state
            return _exchange(stored, body.utterance, debug=bool(debug))
        finally:
            stored.lock.release()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        stored = _get(session_id)
        state = stored.state
        return {
            "session_id": stored.session_id,
            "mode": stored.mode,
            "created_at": stored.created_at,
            "status": state.status.value,
            "outcome": _outcome(state),
            "acts": [act.value for act in state.act_history],
            "profile": profile_to_dict(state.profile),
            "suggestions": {
                "ask": state.suggestions.ask,
                "recommend": state.suggestions.recommend,
                "chat": state.suggestions.chat,
            }
            if state.suggestions
            else None,
            "experiences": state.experiences.text if state.experiences else None,
            "turns": [
                {
                    "index": t.index,
                    "act": t.act.value,
                    "system_text": t.system_response.text,
                    "recommendations": list(t.system_response.recommendations),
                    "user_feedback": t.user_feedback,
                    "acceptance": t.acceptance.value,
                }
                for t in state.turns
            ],
        }

    @app.get("/healthz")
    def healthz() -> dict:
        backend = gateway.backend
        reachable = True
        if isinstance(backend, RemoteBackend):
            try:
                httpx.get(backend.endpoint, timeout=2.0)
            except httpx.HTTPError:
                reachable = False
        return {
            "status": "ok",
            "backend": {"kind": type(backend).__name__, "reachable": reachable},
            "templates": len(gateway.registry.ids()),
        }

    @app.exception_handler(ConvrecError)
    def _convrec_error(request: Request, exc: ConvrecError):
        from fastapi.responses import JSONResponse

        status = 503 if isinstance(exc, _BACKEND_FAILURES) else 500
        log.error("unhandled %s: %s", type(exc).__name__, exc)
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    return app


def _outcome(state: SessionState) -> str | None:
    if state.status is SessionStatus.SUCCESS:
        return "success"
    if state.status is SessionStatus.FALLBACK_DONE:
        return "fallback"
    return None

def _latest_strategy(traces: list[dict], pending: dict | None) -> dict | None:
    for trace in ([pending] if pending else []) + list(reversed(traces)):
        strategy = trace.get("strategy_reflection")
        if strategy and not strategy.get("skipped"):
            return strategy
    return None
