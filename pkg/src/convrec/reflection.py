"""User feedback-aware reflection.

Information-level reflection rewrites the user profile after every completed
turn; strategy-level reflection runs only when a recommendation is rejected,
summarizing the trajectory since the previous failure into per-responder
suggestions and a planner experience. Both are retained for one turn only.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

from .core import (
    Acceptance,
    DialogueAct,
    ExperienceLog,
    SessionState,
    SuggestionSet,
    SystemResponse,
    UserProfile,
)
from .errors import ContractError
from .gateway import Gateway, has_tag, parse_sections
from .rendering import render_profile_inline

log = logging.getLogger(__name__)

_STRATEGY_HEADERS = ("WHY_FAILED", "SUGGESTION_ASK", "SUGGESTION_REC", "SUGGESTION_CHAT", "EXPERIENCE")
_REMIND_STRATEGY = (
    "\n\nReminder: your previous reply was unusable. It must contain a WHY_FAILED section,"
    " an EXPERIENCE section, and at least one SUGGESTION_* section, using those exact headers."
)


@dataclass(frozen=True)
class TrajectoryStep:
    """What one turn looked like to the system: the profile it acted on, what
    it said, and what the user answered."""

    turn: int
    profile_snapshot: UserProfile
    system_response: SystemResponse
    user_feedback: str


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[TrajectoryStep, ...]
    from_turn: int
    to_turn: int

    def __post_init__(self) -> None:
        expected = tuple(range(self.from_turn, self.to_turn + 1))
        if tuple(s.turn for s in self.steps) != expected:
            raise ContractError("trajectory steps must cover from_turn..to_turn contiguously")


@dataclass(frozen=True)
class ErrorSummary:
    """Parsed output of one strategy reflection."""

    explanation: str
    suggestions: SuggestionSet
    experiences: ExperienceLog

    def __post_init__(self) -> None:
        if not self.explanation.strip():
            raise ContractError("error summary explanation must be non-empty")


@dataclass(frozen=True)
class InfoReflection:
    """Result of one information-level reflection call."""

    profile: UserProfile
    raw_output: str
    parsed_ok: bool


def info_reflect(
    previous_profile: UserProfile,
    system_response: SystemResponse,
    user_feedback: str,
    gateway: Gateway,
    *,
    session_id: str,
    turn_index: int,
) -> InfoReflection:
    """Rewrite the profile from the latest exchange.

    The reflected block is merged into the previous profile: new demand keys
    are added, existing keys are overwritten by the newer value, and history
    grows with normalized dedup. An unparseable block leaves the profile
    unchanged and flags the result.
    """
    raw = gateway.generate(
        "reflect.info",
        {
            "previous_profile": render_profile_inline(previous_profile),
            "system_response": system_response.text,
            "user_feedback": user_feedback,
        },
        session_id=session_id,
        turn_index=turn_index,
    )
    sections = parse_sections(raw, ("DEMAND", "HISTORY"))
    if not has_tag(raw, "DEMAND") and not has_tag(raw, "HISTORY"):
        log.warning("info reflection output unparseable (session %s turn %d); keeping previous profile", session_id, turn_index)
        return InfoReflection(profile=previous_profile, raw_output=raw, parsed_ok=False)
    demand: dict[str, str] = {}
    for entry in _bulleted(sections.get("DEMAND", "")):
        key, sep, value = entry.partition(":")
        if sep and key.strip() and value.strip():
            demand[key.strip()] = value.strip()
    titles = tuple(_bulleted(sections.get("HISTORY", "")))
    return InfoReflection(profile=previous_profile.merged(demand, titles), raw_output=raw, parsed_ok=True)


def _bulleted(section: str) -> list[str]:
    out = []
    for line in section.splitlines():
        stripped = line.strip()
        if stripped.startswith(("-", "*")):
            stripped = stripped[1:].strip()
        if stripped:
            out.append(stripped)
    return out


def collect_trajectory(state: SessionState, t: int) -> Trajectory:
    """The turns since the previous recommendation failure, through turn ``t``.

    The window opens right after the most recent rejected recommendation
    before ``t`` (turn 1 if this is the first failure).
    """
    if t < 1 or t > state.completed_turns:
        raise ContractError(f"turn {t} is not a completed turn")
    failing = state.turns[t - 1]
    if failing.act is not DialogueAct.RECOMMEND or failing.acceptance is not Acceptance.REJECTED:
        raise ContractError(f"turn {t} is not a rejected recommendation")
    prior_failures = [
        turn.index
        for turn in state.turns[: t - 1]
        if turn.act is DialogueAct.RECOMMEND and turn.acceptance is Acceptance.REJECTED
    ]
    start = prior_failures[-1] + 1 if prior_failures else 1
    steps = tuple(
        TrajectoryStep(
            turn=turn.index,
            profile_snapshot=turn.profile_snapshot,
            system_response=turn.system_response,
            user_feedback=turn.user_feedback,
        )
        for turn in state.turns[start - 1 : t]
    )
    return Trajectory(steps=steps, from_turn=start, to_turn=t)


def render_trajectory(trajectory: Trajectory) -> str:
    lines: list[str] = []
    for step in trajectory.steps:
        lines.append(f"user profile {step.turn}: {render_profile_inline(step.profile_snapshot)}")
        lines.append(f"system response {step.turn}: {step.system_response.text}")
        lines.append(f"user utterance {step.turn}: {step.user_feedback}")
    return "\n".join(lines)


def strategy_reflect(trajectory: Trajectory, gateway: Gateway, *, session_id: str) -> ErrorSummary | None:
    """Summarize a failure trajectory into suggestions and an experience.

    Output missing WHY_FAILED, EXPERIENCE, or every suggestion slot gets one
    format-reminder reprompt; if still unusable the reflection is skipped for
    this failure (returns None) and the agents proceed without it.
    """
    t = trajectory.to_turn
    bindings = {"trajectory": render_trajectory(trajectory), "reminder": ""}
    raw = gateway.generate("reflect.strategy", bindings, session_id=session_id, turn_index=t)
    summary = _parse_summary(raw, t)
    if summary is None:
        bindings = dict(bindings, reminder=_REMIND_STRATEGY)
        raw = gateway.generate("reflect.strategy", bindings, session_id=session_id, turn_index=t)
        summary = _parse_summary(raw, t)
        if summary is None:
            log.warning("strategy reflection unusable twice (session %s turn %d); skipping", session_id, t)
    return summary


def _parse_summary(raw: str, t: int) -> ErrorSummary | None:
    sections = parse_sections(raw, _STRATEGY_HEADERS)
    why = sections.get("WHY_FAILED")
    experience = sections.get("EXPERIENCE")
    ask = sections.get("SUGGESTION_ASK")
    rec = sections.get("SUGGESTION_REC")
    chat = sections.get("SUGGESTION_CHAT")
    if not why or not experience or not any((ask, rec, chat)):
        return None
    return ErrorSummary(
        explanation=why,
        suggestions=SuggestionSet(ask=ask, recommend=rec, chat=chat, created_at_turn=t),
        experiences=ExperienceLog(text=experience, created_at_turn=t),
    )


def apply_reflection(state: SessionState, summary: ErrorSummary) -> SessionState:
    """Install a failure summary's suggestions/experiences, replacing any prior ones."""
    if summary.suggestions.created_at_turn != state.completed_turns:
        raise ContractError("reflection summary must come from the just-completed turn")
    return dataclasses.replace(state, suggestions=summary.suggestions, experiences=summary.experiences)
