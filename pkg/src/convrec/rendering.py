"""Renderers for the context sections spliced into prompt templates.

These produce plain text bound to template placeholders; the section headers
here are also what the prompt-composition tests grep for.
"""

from __future__ import annotations

from .core import DialogueAct, SessionState, SystemResponse, UserProfile

PROFILE_HEADER = "User profile:"
SUGGESTION_HEADER = "Suggestion from the previous turn:"
EXPERIENCE_HEADER = "Experience from the previous turn:"


def dialogue_lines(state: SessionState, pending: SystemResponse | None = None) -> list[tuple[str, str]]:
    """(speaker, text) pairs for the conversation so far, oldest first."""
    lines: list[tuple[str, str]] = [("User", state.opening_utterance)]
    for turn in state.turns:
        lines.append(("Assistant", turn.system_response.text))
        if turn.user_feedback:
            lines.append(("User", turn.user_feedback))
    if pending is not None:
        lines.append(("Assistant", pending.text))
    return lines


def render_lines(lines: list[tuple[str, str]]) -> str:
    return "\n".join(f"{speaker}: {text}" for speaker, text in lines)


def render_dialogue(state: SessionState, pending: SystemResponse | None = None) -> str:
    return render_lines(dialogue_lines(state, pending))


def render_profile_section(profile: UserProfile | None) -> str:
    """Profile block with trailing blank line, or "" when profiles are disabled."""
    if profile is None:
        return ""
    lines = [PROFILE_HEADER]
    for key, value in profile.demand.items():
        lines.append(f"- {key}: {value}")
    if profile.browsing_history:
        lines.append("Watched or mentioned already: " + "; ".join(profile.browsing_history))
    if profile.is_empty():
        lines.append("(nothing known yet)")
    return "\n".join(lines) + "\n\n"


def render_profile_inline(profile: UserProfile) -> str:
    parts = [f"{key}: {value}" for key, value in profile.demand.items()]
    if profile.browsing_history:
        parts.append("watched: " + ", ".join(profile.browsing_history))
    return "; ".join(parts) if parts else "(empty)"


def render_suggestion_section(suggestion: str | None) -> str:
    if not suggestion:
        return ""
    return f"{SUGGESTION_HEADER}\n{suggestion}\n\n"


def render_experience_section(experience: str | None) -> str:
    if not experience:
        return ""
    return f"{EXPERIENCE_HEADER}\n{experience}\n\n"


def render_act_history(acts: tuple[DialogueAct, ...]) -> str:
    return ", ".join(act.value for act in acts) if acts else "(none)"


def render_candidates(candidates: dict[DialogueAct, str]) -> str:
    order = (DialogueAct.ASK, DialogueAct.RECOMMEND, DialogueAct.CHITCHAT)
    return "\n".join(f"[{act.value}] {candidates[act]}" for act in order if act in candidates)
