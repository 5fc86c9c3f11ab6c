"""Message, generation-config and call-bookkeeping types for the LLM gateway."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidInputError

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise InvalidInputError(f"unknown chat role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise InvalidInputError(f"{self.role} message content must be non-empty")


@dataclass(frozen=True)
class GenerationConfig:
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_tokens: int = 512
    request_timeout: float = 60.0
    retry_budget: int = 3

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise InvalidInputError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise InvalidInputError("max_tokens must be positive")


@dataclass(frozen=True)
class CallKey:
    """Identity of one logical completion: which template, for which session turn.

    Scripted tables are keyed by this (plus an attempt counter for reprompts),
    never by global call order, so concurrent sessions cannot perturb scripts.
    """

    template_id: str
    session_id: str
    turn_index: int


@dataclass(frozen=True)
class CallRecord:
    """Audit entry for one completion made through the gateway."""

    key: CallKey
    bindings: dict[str, str] = field(default_factory=dict)
    prompt: str = ""
    response: str = ""
