"""The turn controller: responder fan-out, planning, judging, reflection.

One engine drives one session. Both the benchmark harness and the interactive
HTTP service run this same code; they differ only in where user feedback
comes from and which acceptance judge is plugged in.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

from .. import core
from ..agents import (
    CandidateResponse,
    plan,
    respond_ask,
    respond_chat,
    respond_recommend,
    respond_single_agent,
    select_response,
)
from ..core import Acceptance, DialogueAct, SessionState, SystemResponse
from ..errors import StateError
from ..gateway import Gateway
from ..reflection import apply_reflection, collect_trajectory, info_reflect, strategy_reflect
from ..rendering import render_dialogue
from ..simulation import Verdict
from .config import RunConfig, SystemMode
from .records import CandidateTrace, profile_to_dict

JudgeFn = Callable[[SystemResponse, str, int], Verdict]


class TurnEngine:
    """Drives one session turn by turn over immutable state snapshots.

    ``open_session`` produces the first system response; each ``advance``
    consumes the user's feedback to the pending response, runs reflection and
    retention, and produces the next response (or the fallback list, or
    nothing if the session just succeeded). Turn traces accumulate for the
    session record and the debug API.
    """

    def __init__(self, config: RunConfig, gateway: Gateway, session_id: str, judge: JudgeFn):
        self.config = config
        self.gateway = gateway
        self.session_id = session_id
        self.judge = judge
        self.traces: list[dict] = []
        self._pending_trace: dict | None = None

    # -- checkpointing, so a failed turn leaves no half-written trace --

    def checkpoint(self) -> tuple[int, dict | None]:
        return len(self.traces), dict(self._pending_trace) if self._pending_trace else None

    def rollback(self, checkpoint: tuple[int, dict | None]) -> None:
        count, pending = checkpoint
        del self.traces[count:]
        self._pending_trace = pending

    # -- protocol steps --

    def open_session(self, opening_utterance: str) -> tuple[SessionState, SystemResponse]:
        state = core.new_session(self.config.session_config, opening_utterance)
        return self._respond(state)

    def advance(self, state: SessionState, user_feedback: str) -> tuple[SessionState, SystemResponse | None]:
        """Complete the pending turn with the user's feedback, then move on."""
        if core.is_terminal(state):
            raise StateError("session is terminal")
        response = state.pending_system
        if response is None:
            raise StateError("no system response is awaiting feedback")
        turn_index = state.current_turn_index

        verdict: Verdict | None = None
        acceptance = Acceptance.NOT_APPLICABLE
        if response.act is DialogueAct.RECOMMEND:
            verdict = self.judge(response, user_feedback, turn_index)
            acceptance = verdict.outcome
        state = core.apply_turn(state, response, user_feedback, acceptance)
        state = self._reflect(state, response, user_feedback, acceptance)
        self._finish_trace(state, user_feedback, acceptance, verdict)

        if state.status is core.SessionStatus.SUCCESS:
            return state, None
        if state.completed_turns == self.config.max_turns:
            return self._fallback(state)
        return self._respond(state)

    # -- internals --

    def _reflect(
        self, state: SessionState, response: SystemResponse, user_feedback: str, acceptance: Acceptance
    ) -> SessionState:
        t = state.completed_turns
        trace = self._require_trace(t)
        if self.config.ir_enabled:
            reflected = info_reflect(
                state.turns[-1].profile_snapshot, response, user_feedback, self.gateway,
                session_id=self.session_id, turn_index=t,
            )
            state = core.apply_profile(state, reflected.profile)
            trace["info_reflection"] = {
                "raw": reflected.raw_output,
                "ok": reflected.parsed_ok,
                "profile_after": profile_to_dict(reflected.profile),
            }
        failed_recommendation = response.act is DialogueAct.RECOMMEND and acceptance is Acceptance.REJECTED
        if failed_recommendation and self.config.sr_enabled:
            trajectory = collect_trajectory(state, t)
            summary = strategy_reflect(trajectory, self.gateway, session_id=self.session_id)
            raw = self.gateway.calls_for("reflect.strategy", self.session_id)[-1].response
            if summary is not None:
                state = apply_reflection(state, summary)
                trace["strategy_reflection"] = {
                    "raw": raw,
                    "skipped": False,
                    "from_turn": trajectory.from_turn,
                    "to_turn": trajectory.to_turn,
                    "why_failed": summary.explanation,
                    "suggestion_ask": summary.suggestions.ask,
                    "suggestion_rec": summary.suggestions.recommend,
                    "suggestion_chat": summary.suggestions.chat,
                    "experience": summary.experiences.text,
                }
            else:
                trace["strategy_reflection"] = {"raw": raw, "skipped": True}
        return core.expire_stale_memory(state)

    def _respond(self, state: SessionState) -> tuple[SessionState, SystemResponse]:
        turn_index = state.current_turn_index
        dialogue = render_dialogue(state)
        if self.config.mode is SystemMode.SINGLE_AGENT:
            response = respond_single_agent(
                dialogue, self.gateway, session_id=self.session_id, turn_index=turn_index
            )
            self._pending_trace = self._new_trace(state, response, candidates=None, rationale=None, fallback_flag=False)
            return core.set_pending(state, response), response

        suggestions, experiences = core.active_memory(state)
        profile = state.profile if self.config.ir_enabled else None
        kwargs = dict(session_id=self.session_id, turn_index=turn_index)

        def draft_ask() -> CandidateResponse:
            return respond_ask(dialogue, profile, suggestions.ask if suggestions else None, self.gateway, **kwargs)

        def draft_rec() -> CandidateResponse:
            return respond_recommend(
                dialogue, profile, suggestions.recommend if suggestions else None, self.gateway, n_items=1, **kwargs
            )

        def draft_chat() -> CandidateResponse:
            return respond_chat(dialogue, profile, suggestions.chat if suggestions else None, self.gateway, **kwargs)

        if self.config.parallel_fanout:
            with ThreadPoolExecutor(max_workers=3) as pool:
                futures = [pool.submit(draft_ask), pool.submit(draft_rec), pool.submit(draft_chat)]
                candidates = tuple(f.result() for f in futures)
        else:
            candidates = (draft_ask(), draft_rec(), draft_chat())

        decision = plan(
            candidates, dialogue, state.act_history,
            experiences.text if experiences else None, self.gateway, **kwargs,
        )
        response = select_response(candidates, decision)
        self._pending_trace = self._new_trace(
            state, response,
            candidates=tuple(CandidateTrace(c.act.value, c.text, c.recommendations) for c in candidates),
            rationale=decision.rationale,
            fallback_flag=decision.parse_fallback_used,
        )
        return core.set_pending(state, response), response

    def _fallback(self, state: SessionState) -> tuple[SessionState, SystemResponse]:
        turn_index = state.current_turn_index
        suggestions, _ = core.active_memory(state)
        candidate = respond_recommend(
            render_dialogue(state),
            state.profile if self.config.ir_enabled else None,
            suggestions.recommend if suggestions else None,
            self.gateway,
            n_items=self.config.fallback_size,
            session_id=self.session_id,
            turn_index=turn_index,
        )
        response = SystemResponse(act=DialogueAct.FALLBACK, text=candidate.text, recommendations=candidate.recommendations)
        self._pending_trace = self._new_trace(state, response, candidates=None, rationale=None, fallback_flag=False)
        state = core.set_pending(state, response)
        state = core.apply_turn(state, response, "", Acceptance.REJECTED)
        self._finish_trace(state, "", Acceptance.REJECTED, None)
        return state, response

    def _new_trace(
        self,
        state: SessionState,
        response: SystemResponse,
        candidates: tuple[CandidateTrace, ...] | None,
        rationale: str | None,
        fallback_flag: bool,
    ) -> dict:
        return {
            "index": state.current_turn_index,
            "act": response.act.value,
            "system_text": response.text,
            "recommendations": list(response.recommendations),
            "profile_before": profile_to_dict(state.profile),
            "candidates": candidates,
            "planner_rationale": rationale,
            "parse_fallback_used": fallback_flag,
            "info_reflection": None,
            "strategy_reflection": None,
        }

    def _require_trace(self, index: int) -> dict:
        if self._pending_trace is None or self._pending_trace["index"] != index:
            raise StateError(f"no pending trace for turn {index}")
        return self._pending_trace

    def _finish_trace(self, state: SessionState, feedback: str, acceptance: Acceptance, verdict: Verdict | None) -> None:
        trace = self._require_trace(state.completed_turns)
        trace["user_feedback"] = feedback
        trace["acceptance"] = acceptance.value
        if verdict is not None:
            trace["verdict_signal"] = verdict.signal.value
            trace["verdict_disagreement"] = verdict.disagreement
        self.traces.append(trace)
        self._pending_trace = None
