"""Uniform access to text generation: named templates in, completions out.

The :class:`Gateway` facade binds a template registry to a backend and keeps
an audit log of every call (template id, bindings, rendered prompt, raw
response), which the invariant tests and the benchmark records both read.
"""

from __future__ import annotations

import threading
from typing import Mapping

from .backends import Backend, RemoteBackend, ReplayBackend, ScriptedBackend, complete
from .tags import extract_tagged_line, has_tag, parse_bullets, parse_sections, strip_tagged_lines
from .templates import PromptTemplate, TemplateRegistry, render
from .types import CallKey, CallRecord, ChatMessage, GenerationConfig

__all__ = [
    "Backend",
    "CallKey",
    "CallRecord",
    "ChatMessage",
    "Gateway",
    "GenerationConfig",
    "PromptTemplate",
    "RemoteBackend",
    "ReplayBackend",
    "ScriptedBackend",
    "TemplateRegistry",
    "complete",
    "extract_tagged_line",
    "has_tag",
    "parse_bullets",
    "parse_sections",
    "render",
    "strip_tagged_lines",
]

# Per-template response budgets; the long-form outputs get more room.
DEFAULT_MAX_TOKENS: dict[str, int] = {
    "responder.ask": 200,
    "responder.chat": 200,
    "responder.rec": 300,
    "planner": 400,
    "reflect.info": 400,
    "reflect.strategy": 600,
    "simulator.user": 200,
    "simulator.profile": 200,
    "evaluator.pairwise": 200,
    "baseline.single_agent": 400,
    "judge.acceptance": 10,
}


class Gateway:
    """Renders a named template and completes it against one backend."""

    def __init__(
        self,
        backend: Backend,
        gen: GenerationConfig | None = None,
        registry: TemplateRegistry | None = None,
        max_tokens_by_template: Mapping[str, int] | None = None,
    ):
        self.backend = backend
        self.gen = gen or GenerationConfig()
        self.registry = registry or TemplateRegistry.builtin()
        self.max_tokens_by_template = dict(DEFAULT_MAX_TOKENS if max_tokens_by_template is None else max_tokens_by_template)
        self._calls: list[CallRecord] = []
        self._lock = threading.Lock()

    def generate(self, template_id: str, bindings: Mapping[str, str], *, session_id: str, turn_index: int) -> str:
        prompt = self.registry.render(template_id, bindings)
        key = CallKey(template_id=template_id, session_id=session_id, turn_index=turn_index)
        gen = self.gen
        budget = self.max_tokens_by_template.get(template_id)
        if budget is not None and budget != gen.max_tokens:
            gen = GenerationConfig(
                model=gen.model,
                temperature=gen.temperature,
                max_tokens=budget,
                request_timeout=gen.request_timeout,
                retry_budget=gen.retry_budget,
            )
        response = complete([ChatMessage("system", prompt)], gen, self.backend, key)
        with self._lock:
            self._calls.append(CallRecord(key=key, bindings=dict(bindings), prompt=prompt, response=response))
        return response

    @property
    def calls(self) -> tuple[CallRecord, ...]:
        with self._lock:
            return tuple(self._calls)

    def calls_for(self, template_id: str | None = None, session_id: str | None = None) -> tuple[CallRecord, ...]:
        return tuple(
            c
            for c in self.calls
            if (template_id is None or c.key.template_id == template_id)
            and (session_id is None or c.key.session_id == session_id)
        )
