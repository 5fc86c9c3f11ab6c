"""The three responder agents, the planner agent, and the single-agent baseline.

Each responder drafts one candidate response for its dialogue act from the
shared context (dialogue history, user profile, previous-turn suggestion);
the planner then picks one candidate, and the controller delivers the chosen
candidate's text unchanged — the planner selects, it never rewrites.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .core import DialogueAct, SystemResponse, UserProfile
from .errors import AgentFailureError, ContractError, MalformedOutputError
from .gateway import Gateway, extract_tagged_line, strip_tagged_lines
from .rendering import (
    render_act_history,
    render_candidates,
    render_experience_section,
    render_profile_section,
    render_suggestion_section,
)
from .titles import normalize_title

log = logging.getLogger(__name__)

RESPONDER_TEMPLATES = {
    DialogueAct.ASK: "responder.ask",
    DialogueAct.RECOMMEND: "responder.rec",
    DialogueAct.CHITCHAT: "responder.chat",
}

_TAGS = ("RECOMMEND", "SELECTED", "ACCEPT")

_REMIND_QUESTION = "\n\nReminder: your previous reply was rejected because it asked no question. Ask the user at least one question."
_REMIND_NO_REC = "\n\nReminder: your previous reply was rejected because it contained a RECOMMEND line. Do not recommend; no RECOMMEND lines."
_REMIND_REC_COUNT = "\n\nReminder: your previous reply was rejected because it did not contain exactly {n} distinct `RECOMMEND: <movie title>` line(s). Follow the format exactly."
_REMIND_REC_SEEN = "\n\nReminder: your previous reply recommended {titles}, which the user already knows. Recommend different movies."
_REMIND_SELECTED = "\n\nReminder: your previous reply was unusable. Output exactly one line `SELECTED: <ask|recommend|chat>`."

_SELECTED_VALUES = {"ask": DialogueAct.ASK, "recommend": DialogueAct.RECOMMEND, "chat": DialogueAct.CHITCHAT}


@dataclass(frozen=True)
class CandidateResponse:
    """One responder agent's draft for its dialogue act."""

    act: DialogueAct
    text: str
    recommendations: tuple[str, ...] = ()
    raw: str = ""

    def __post_init__(self) -> None:
        if (self.act is DialogueAct.RECOMMEND) != bool(self.recommendations):
            raise ContractError("recommendations are carried by recommend candidates only")


@dataclass(frozen=True)
class PlannerDecision:
    selected_act: DialogueAct
    rationale: str
    parse_fallback_used: bool = False


def _generate_nonempty(gateway: Gateway, template_id: str, bindings: dict[str, str], *, session_id: str, turn_index: int) -> str:
    """One completion, retried once on empty output."""
    out = gateway.generate(template_id, bindings, session_id=session_id, turn_index=turn_index)
    if not out.strip():
        out = gateway.generate(template_id, bindings, session_id=session_id, turn_index=turn_index)
    if not out.strip():
        raise AgentFailureError(f"{template_id} produced empty output twice (session {session_id}, turn {turn_index})")
    return out


def _chatty_bindings(dialogue: str, profile: UserProfile | None, suggestion: str | None) -> dict[str, str]:
    return {
        "profile_section": render_profile_section(profile),
        "suggestion_section": render_suggestion_section(suggestion),
        "dialogue": dialogue,
        "reminder": "",
    }


def _respond_plain(
    act: DialogueAct,
    dialogue: str,
    profile: UserProfile | None,
    suggestion: str | None,
    gateway: Gateway,
    *,
    session_id: str,
    turn_index: int,
    needs_question: bool,
) -> CandidateResponse:
    template_id = RESPONDER_TEMPLATES[act]
    bindings = _chatty_bindings(dialogue, profile, suggestion)
    raw = _generate_nonempty(gateway, template_id, bindings, session_id=session_id, turn_index=turn_index)
    for _ in range(2):
        text = strip_tagged_lines(raw, _TAGS)
        if extract_tagged_line(raw, "RECOMMEND"):
            reminder = _REMIND_NO_REC
        elif needs_question and "?" not in text:
            reminder = _REMIND_QUESTION
        else:
            return CandidateResponse(act=act, text=text, raw=raw)
        bindings = dict(bindings, reminder=reminder)
        raw = _generate_nonempty(gateway, template_id, bindings, session_id=session_id, turn_index=turn_index)
    text = strip_tagged_lines(raw, _TAGS)
    if extract_tagged_line(raw, "RECOMMEND") or (needs_question and "?" not in text):
        raise MalformedOutputError(f"{template_id} violated its output contract after a reprompt")
    return CandidateResponse(act=act, text=text, raw=raw)


def respond_ask(
    dialogue: str,
    profile: UserProfile | None,
    suggestion: str | None,
    gateway: Gateway,
    *,
    session_id: str,
    turn_index: int,
) -> CandidateResponse:
    """Draft a preference-eliciting question."""
    return _respond_plain(
        DialogueAct.ASK, dialogue, profile, suggestion, gateway,
        session_id=session_id, turn_index=turn_index, needs_question=True,
    )


def respond_chat(
    dialogue: str,
    profile: UserProfile | None,
    suggestion: str | None,
    gateway: Gateway,
    *,
    session_id: str,
    turn_index: int,
) -> CandidateResponse:
    """Draft a chit-chat turn that probes preferences without recommending."""
    return _respond_plain(
        DialogueAct.CHITCHAT, dialogue, profile, suggestion, gateway,
        session_id=session_id, turn_index=turn_index, needs_question=False,
    )


def _recommend_problem(titles: list[str], n_items: int, profile: UserProfile | None) -> tuple[str | None, str]:
    if len(titles) != n_items or len({normalize_title(t) for t in titles}) != n_items:
        return _REMIND_REC_COUNT.format(n=n_items), "count"
    if profile is not None:
        seen = {normalize_title(t) for t in profile.browsing_history}
        collisions = [t for t in titles if normalize_title(t) in seen]
        if collisions:
            return _REMIND_REC_SEEN.format(titles=", ".join(collisions)), "collision"
    return None, ""


def respond_recommend(
    dialogue: str,
    profile: UserProfile | None,
    suggestion: str | None,
    gateway: Gateway,
    *,
    n_items: int = 1,
    session_id: str,
    turn_index: int,
) -> CandidateResponse:
    """Draft a recommendation carrying exactly ``n_items`` RECOMMEND lines.

    ``n_items`` is 1 during dialogue turns and the fallback list size for the
    terminal list call. Titles already in the user's browsing history trigger
    one reprompt naming the forbidden titles, then a hard failure.
    """
    bindings = dict(_chatty_bindings(dialogue, profile, suggestion), n_items=str(n_items))
    raw = _generate_nonempty(gateway, "responder.rec", bindings, session_id=session_id, turn_index=turn_index)
    for _ in range(2):
        titles = extract_tagged_line(raw, "RECOMMEND")
        reminder, _kind = _recommend_problem(titles, n_items, profile)
        if reminder is None:
            return CandidateResponse(act=DialogueAct.RECOMMEND, text=strip_tagged_lines(raw, _TAGS), recommendations=tuple(titles), raw=raw)
        bindings = dict(bindings, reminder=reminder)
        raw = _generate_nonempty(gateway, "responder.rec", bindings, session_id=session_id, turn_index=turn_index)
    titles = extract_tagged_line(raw, "RECOMMEND")
    reminder, kind = _recommend_problem(titles, n_items, profile)
    if reminder is not None:
        raise MalformedOutputError(f"responder.rec failed its {kind} contract after a reprompt (wanted {n_items} items)")
    return CandidateResponse(act=DialogueAct.RECOMMEND, text=strip_tagged_lines(raw, _TAGS), recommendations=tuple(titles), raw=raw)


def plan(
    candidates: tuple[CandidateResponse, ...],
    dialogue: str,
    act_history: tuple[DialogueAct, ...],
    experience: str | None,
    gateway: Gateway,
    *,
    session_id: str,
    turn_index: int,
) -> PlannerDecision:
    """Select one candidate act via the planner's three-step reasoning.

    After one format-reminder reprompt, an unparseable selection falls back to
    Ask (the safest act: it gathers information and cannot misrecommend) with
    ``parse_fallback_used`` flagged for audit.
    """
    by_act = {c.act: c for c in candidates}
    if len(candidates) != 3 or set(by_act) != {DialogueAct.ASK, DialogueAct.RECOMMEND, DialogueAct.CHITCHAT}:
        raise ContractError("planner needs exactly one candidate per act")
    bindings = {
        "act_history": render_act_history(act_history),
        "experience_section": render_experience_section(experience),
        "dialogue": dialogue,
        "candidates": render_candidates({act: c.text for act, c in by_act.items()}),
        "reminder": "",
    }
    raw = gateway.generate("planner", bindings, session_id=session_id, turn_index=turn_index)
    act = _parse_selection(raw)
    if act is None:
        bindings = dict(bindings, reminder=_REMIND_SELECTED)
        raw = gateway.generate("planner", bindings, session_id=session_id, turn_index=turn_index)
        act = _parse_selection(raw)
        if act is None:
            log.warning("planner selection unparseable twice (session %s turn %d); falling back to ask", session_id, turn_index)
            return PlannerDecision(selected_act=DialogueAct.ASK, rationale=raw, parse_fallback_used=True)
    return PlannerDecision(selected_act=act, rationale=raw, parse_fallback_used=False)


def _parse_selection(raw: str) -> DialogueAct | None:
    values = extract_tagged_line(raw, "SELECTED")
    if len(values) != 1:
        return None
    value = values[0].strip().strip("`'\".").lower()
    return _SELECTED_VALUES.get(value)


def select_response(candidates: tuple[CandidateResponse, ...], decision: PlannerDecision) -> SystemResponse:
    """The chosen candidate, byte-for-byte, as the system response."""
    for candidate in candidates:
        if candidate.act is decision.selected_act:
            return SystemResponse(act=candidate.act, text=candidate.text, recommendations=candidate.recommendations)
    raise ContractError(f"no candidate for selected act {decision.selected_act.value}")


def respond_single_agent(dialogue: str, gateway: Gateway, *, session_id: str, turn_index: int) -> SystemResponse:
    """One-completion baseline: merged instructions, act inferred from the reply.

    A RECOMMEND line means recommending; otherwise a question mark means
    asking; otherwise chit-chat.
    """
    bindings = {"dialogue": dialogue, "reminder": ""}
    raw = _generate_nonempty(gateway, "baseline.single_agent", bindings, session_id=session_id, turn_index=turn_index)
    titles = extract_tagged_line(raw, "RECOMMEND")
    if len(titles) > 1:
        bindings = dict(bindings, reminder=_REMIND_REC_COUNT.format(n=1))
        raw = _generate_nonempty(gateway, "baseline.single_agent", bindings, session_id=session_id, turn_index=turn_index)
        titles = extract_tagged_line(raw, "RECOMMEND")
        if len(titles) > 1:
            raise MalformedOutputError("single-agent reply carried multiple RECOMMEND lines after a reprompt")
    text = strip_tagged_lines(raw, _TAGS)
    if titles:
        return SystemResponse(act=DialogueAct.RECOMMEND, text=text, recommendations=(titles[0],))
    if "?" in text:
        return SystemResponse(act=DialogueAct.ASK, text=text)
    return SystemResponse(act=DialogueAct.CHITCHAT, text=text)
