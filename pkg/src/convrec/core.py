"""Domain types and the session state machine shared by all other modules.

States are immutable snapshots: every transition returns a new
:class:`SessionState`, which makes recorded sessions replayable and lets
independent sessions run concurrently without locks.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

from .errors import ContractError, InvalidInputError, StateError
from .titles import normalize_title


class DialogueAct(str, Enum):
    ASK = "ask"
    RECOMMEND = "recommend"
    CHITCHAT = "chat"
    # Only ever emitted as the terminal list turn of an unsuccessful session,
    # never selected by the planner.
    FALLBACK = "fallback"


class Acceptance(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    NOT_APPLICABLE = "not_applicable"


class SessionStatus(str, Enum):
    ACTIVE = "active"
    SUCCESS = "success"
    FALLBACK_DONE = "fallback_done"


@dataclass(frozen=True)
class Item:
    """A catalog item. ``interaction_count`` is the popularity proxy."""

    id: str
    title: str
    genres: frozenset[str] = frozenset()
    interaction_count: int = 0

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise InvalidInputError("item title must be non-empty")
        if self.interaction_count < 0:
            raise InvalidInputError("interaction_count must be non-negative")


@dataclass(frozen=True)
class SystemResponse:
    """The system utterance delivered to the user for one turn."""

    act: DialogueAct
    text: str
    recommendations: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.recommendations)
        if self.act is DialogueAct.RECOMMEND and n != 1:
            raise ContractError(f"recommend response must carry exactly 1 title, got {n}")
        if self.act is DialogueAct.FALLBACK and n < 1:
            raise ContractError("fallback response must carry a non-empty list")
        if self.act in (DialogueAct.ASK, DialogueAct.CHITCHAT) and n:
            raise ContractError(f"{self.act.value} response must not carry recommendations")


@dataclass(frozen=True)
class UserProfile:
    """Inferred user demand (attribute -> value) plus mentioned-item history.

    Demand keys are case-folded and stripped on construction; browsing
    history keeps first-seen spellings, deduplicated by normalized title.
    """

    demand: dict[str, str] = field(default_factory=dict)
    browsing_history: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        clean: dict[str, str] = {}
        for key, value in self.demand.items():
            k = key.strip().casefold()
            if not k:
                raise InvalidInputError("demand attribute names must be non-empty")
            clean[k] = value.strip()
        object.__setattr__(self, "demand", clean)
        seen: set[str] = set()
        deduped: list[str] = []
        for title in self.browsing_history:
            norm = normalize_title(title)
            if norm and norm not in seen:
                seen.add(norm)
                deduped.append(title)
        object.__setattr__(self, "browsing_history", tuple(deduped))

    @staticmethod
    def empty() -> "UserProfile":
        return UserProfile()

    def is_empty(self) -> bool:
        return not self.demand and not self.browsing_history

    def merged(self, new_demand: dict[str, str], new_titles: tuple[str, ...]) -> "UserProfile":
        """Add-or-overwrite demand keys, append history with normalized dedup."""
        demand = dict(self.demand)
        for key, value in new_demand.items():
            k = key.strip().casefold()
            if k and value.strip():
                demand[k] = value.strip()
        return UserProfile(demand=demand, browsing_history=self.browsing_history + tuple(new_titles))


@dataclass(frozen=True)
class SuggestionSet:
    """Per-responder strategy suggestions produced by one failure reflection."""

    ask: str | None = None
    recommend: str | None = None
    chat: str | None = None
    created_at_turn: int = 0

    def __post_init__(self) -> None:
        if not any(s and s.strip() for s in (self.ask, self.recommend, self.chat)):
            raise ContractError("a suggestion set must fill at least one slot")

    def for_act(self, act: DialogueAct) -> str | None:
        return {DialogueAct.ASK: self.ask, DialogueAct.RECOMMEND: self.recommend, DialogueAct.CHITCHAT: self.chat}.get(act)


@dataclass(frozen=True)
class ExperienceLog:
    """Corrective experience handed to the planner after a failure reflection."""

    text: str
    created_at_turn: int

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ContractError("experience text must be non-empty")


@dataclass(frozen=True)
class Turn:
    """One completed exchange: system response followed by user feedback.

    ``profile_snapshot`` is the profile the agents saw while producing this
    turn (captured before that turn's information reflection), which is what
    failure-trajectory collection needs.
    """

    index: int
    act: DialogueAct
    system_response: SystemResponse
    user_feedback: str
    acceptance: Acceptance
    profile_snapshot: UserProfile = field(default_factory=UserProfile)

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ContractError("turn index is 1-based")
        if self.act is not self.system_response.act:
            raise ContractError("turn act must match its system response")
        judged = self.act in (DialogueAct.RECOMMEND, DialogueAct.FALLBACK)
        if judged and self.acceptance is Acceptance.NOT_APPLICABLE:
            raise ContractError(f"{self.act.value} turns must carry an acceptance verdict")
        if not judged and self.acceptance is not Acceptance.NOT_APPLICABLE:
            raise ContractError(f"{self.act.value} turns carry no acceptance verdict")


@dataclass(frozen=True)
class DialogueHistory:
    turns: tuple[Turn, ...] = ()

    def __post_init__(self) -> None:
        for pos, turn in enumerate(self.turns, start=1):
            if turn.index != pos:
                raise ContractError("turn indices must increase by exactly 1")

    def __len__(self) -> int:
        return len(self.turns)


@dataclass(frozen=True)
class SessionConfig:
    """Per-session protocol knobs, snapshotted into the state."""

    max_turns: int = 5
    fallback_size: int = 10
    # Whether the fallback list emission counts as a turn of its own when
    # reporting turn counts for unsuccessful sessions (NT = max_turns + 1).
    count_fallback_turn: bool = True

    def __post_init__(self) -> None:
        if self.max_turns < 1:
            raise InvalidInputError("max_turns must be >= 1")
        if self.fallback_size < 1:
            raise InvalidInputError("fallback_size must be >= 1")


@dataclass(frozen=True)
class SessionState:
    """Full per-conversation state.

    ``pending_system`` holds a delivered system response whose user feedback
    has not arrived yet (the in-between point of an interactive exchange).
    """

    config: SessionConfig
    opening_utterance: str
    turns: tuple[Turn, ...] = ()
    profile: UserProfile = field(default_factory=UserProfile)
    suggestions: SuggestionSet | None = None
    experiences: ExperienceLog | None = None
    last_failure_boundary: int = 0
    status: SessionStatus = SessionStatus.ACTIVE
    pending_system: SystemResponse | None = None

    @property
    def history(self) -> DialogueHistory:
        return DialogueHistory(self.turns)

    @property
    def act_history(self) -> tuple[DialogueAct, ...]:
        return tuple(turn.act for turn in self.turns)

    @property
    def completed_turns(self) -> int:
        return len(self.turns)

    @property
    def current_turn_index(self) -> int:
        """Index of the turn being produced (completed turns + 1)."""
        return len(self.turns) + 1

    @property
    def latest_user_utterance(self) -> str:
        return self.turns[-1].user_feedback if self.turns else self.opening_utterance


def new_session(config: SessionConfig, opening_utterance: str) -> SessionState:
    """Start a session from the user's opening message."""
    if not opening_utterance.strip():
        raise InvalidInputError("opening utterance must be non-empty")
    return SessionState(config=config, opening_utterance=opening_utterance)


def is_terminal(state: SessionState) -> bool:
    return state.status is not SessionStatus.ACTIVE


def set_pending(state: SessionState, response: SystemResponse) -> SessionState:
    """Record a delivered system response awaiting user feedback."""
    if is_terminal(state):
        raise StateError("cannot respond in a terminal session")
    if state.pending_system is not None:
        raise StateError("a system response is already awaiting feedback")
    _check_turn_position(state, response)
    return dataclasses.replace(state, pending_system=response)


def _check_turn_position(state: SessionState, response: SystemResponse) -> None:
    turn_index = state.current_turn_index
    if response.act is DialogueAct.FALLBACK:
        if turn_index != state.config.max_turns + 1:
            raise StateError(f"fallback is only valid at turn {state.config.max_turns + 1}, not {turn_index}")
        if len(response.recommendations) != state.config.fallback_size:
            raise ContractError(
                f"fallback list must hold exactly {state.config.fallback_size} items, got {len(response.recommendations)}"
            )
    elif turn_index > state.config.max_turns:
        raise StateError(f"turn {turn_index} exceeds max_turns={state.config.max_turns}; only fallback is allowed")


def apply_turn(
    state: SessionState,
    system_response: SystemResponse,
    user_feedback: str,
    acceptance: Acceptance,
) -> SessionState:
    """Append one completed turn. Pure: equal inputs yield equal states."""
    if is_terminal(state):
        raise StateError("cannot apply a turn to a terminal session")
    _check_turn_position(state, system_response)
    if system_response.act is not DialogueAct.FALLBACK and not user_feedback.strip():
        raise InvalidInputError("user feedback must be non-empty")

    index = state.current_turn_index
    turn = Turn(
        index=index,
        act=system_response.act,
        system_response=system_response,
        user_feedback=user_feedback,
        acceptance=acceptance,
        profile_snapshot=state.profile,
    )
    status = state.status
    boundary = state.last_failure_boundary
    if turn.act is DialogueAct.FALLBACK:
        status = SessionStatus.FALLBACK_DONE
    elif turn.act is DialogueAct.RECOMMEND:
        if acceptance is Acceptance.ACCEPTED:
            status = SessionStatus.SUCCESS
        else:
            boundary = index
    return dataclasses.replace(
        state,
        turns=state.turns + (turn,),
        status=status,
        last_failure_boundary=boundary,
        pending_system=None,
    )


def apply_profile(state: SessionState, profile: UserProfile) -> SessionState:
    """Install the profile produced by information reflection."""
    return dataclasses.replace(state, profile=profile)


def expire_stale_memory(state: SessionState) -> SessionState:
    """Drop suggestions/experiences not created at the latest completed turn.

    Only the previous turn's reflection output is retained, so anything older
    than the last completed turn disappears before the next turn's prompts.
    """
    current = state.completed_turns
    suggestions = state.suggestions if state.suggestions and state.suggestions.created_at_turn == current else None
    experiences = state.experiences if state.experiences and state.experiences.created_at_turn == current else None
    if suggestions is state.suggestions and experiences is state.experiences:
        return state
    return dataclasses.replace(state, suggestions=suggestions, experiences=experiences)


def active_memory(state: SessionState) -> tuple[SuggestionSet | None, ExperienceLog | None]:
    """Suggestions/experiences usable for the turn about to be produced.

    One-turn retention: usable iff created at exactly the previous turn.
    """
    previous = state.current_turn_index - 1
    suggestions = state.suggestions if state.suggestions and state.suggestions.created_at_turn == previous else None
    experiences = state.experiences if state.experiences and state.experiences.created_at_turn == previous else None
    return suggestions, experiences
