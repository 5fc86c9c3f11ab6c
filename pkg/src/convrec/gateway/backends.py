"""Text-generation backends: remote OpenAI-compatible HTTP, scripted tables,
and a record/replay cache.

Scripted and replay backends are the workhorses of the test suite: both are
referentially transparent (equal keys give equal outputs regardless of call
interleaving), which is what makes benchmark runs byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import httpx

from ..errors import InvalidInputError, ReplayMissError, ScriptGapError, TransportError
from .types import CallKey, ChatMessage, GenerationConfig

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class Backend(Protocol):
    def complete(self, messages: Sequence[ChatMessage], gen: GenerationConfig, key: CallKey) -> str: ...


def complete(messages: Sequence[ChatMessage], gen: GenerationConfig, backend: Backend, key: CallKey) -> str:
    """Run one completion against the given backend."""
    if not messages:
        raise InvalidInputError("messages must be non-empty")
    if messages[0].role != "system":
        raise InvalidInputError("first message must have the system role")
    return backend.complete(messages, gen, key)


def prompt_text(messages: Sequence[ChatMessage]) -> str:
    return "\n".join(f"{m.role}: {m.content}" for m in messages)


def replay_cache_key(template_id: str, prompt: str, model: str, temperature: float) -> str:
    material = "\x00".join((template_id, prompt, model, repr(temperature)))
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def _script_key_str(key: CallKey) -> str:
    return f"{key.template_id}|{key.session_id}|{key.turn_index}"


class ScriptedBackend:
    """Deterministic table lookup keyed by (template id, session id, turn index).

    A table value is either a single string (returned for every attempt) or a
    list of strings indexed by attempt number, which is how fixtures script
    reprompt flows. A missing key or exhausted attempt list is a fixture bug
    and raises; scripted runs never improvise.
    """

    def __init__(self, table: Mapping[str | tuple[str, str, int], str | list[str]]):
        self._table: dict[str, str | list[str]] = {}
        for raw_key, value in table.items():
            if isinstance(raw_key, tuple):
                raw_key = f"{raw_key[0]}|{raw_key[1]}|{raw_key[2]}"
            self._table[raw_key] = value
        self._attempts: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def complete(self, messages: Sequence[ChatMessage], gen: GenerationConfig, key: CallKey) -> str:
        skey = _script_key_str(key)
        with self._lock:
            attempt = self._attempts.get(skey, 0)
            self._attempts[skey] = attempt + 1
        try:
            value = self._table[skey]
        except KeyError:
            raise ScriptGapError(f"no scripted response for key {skey!r}") from None
        if isinstance(value, str):
            return value
        if attempt >= len(value):
            raise ScriptGapError(f"scripted responses for key {skey!r} exhausted at attempt {attempt}")
        return value[attempt]


class ReplayBackend:
    """Cache of completions keyed by a hash of (template id, prompt, model, temperature).

    With ``fallthrough`` enabled and an inner backend configured, misses are
    forwarded and recorded, turning a live run into a reusable fixture.
    """

    def __init__(self, cache_path: str | Path, fallthrough: bool = False, inner: Backend | None = None):
        self.cache_path = Path(cache_path)
        self.fallthrough = fallthrough
        self.inner = inner
        self._cache: dict[str, str] = {}
        if self.cache_path.exists():
            self._cache = json.loads(self.cache_path.read_text(encoding="utf-8"))
        self._lock = threading.Lock()
        self._dirty = False

    def complete(self, messages: Sequence[ChatMessage], gen: GenerationConfig, key: CallKey) -> str:
        cache_key = replay_cache_key(key.template_id, prompt_text(messages), gen.model, gen.temperature)
        with self._lock:
            if cache_key in self._cache:
                return self._cache[cache_key]
        if not (self.fallthrough and self.inner is not None):
            raise ReplayMissError(f"no cached response for template {key.template_id!r} (key {cache_key[:12]}...)")
        response = self.inner.complete(messages, gen, key)
        with self._lock:
            self._cache[cache_key] = response
            self._dirty = True
        return response

    def save(self) -> None:
        with self._lock:
            if not self._dirty:
                return
            self.cache_path.parent.mkdir(parents=True, exist_ok=True)
            self.cache_path.write_text(
                json.dumps(self._cache, sort_keys=True, indent=1), encoding="utf-8"
            )
            self._dirty = False


@dataclass
class RemoteBackend:
    """OpenAI-compatible chat-completions client with bounded retry.

    Retries 429s and transient transport failures with exponential backoff
    until the generation config's retry budget is spent; other HTTP errors
    fail immediately. The API key is read from the environment variable named
    by ``api_key_env``.
    """

    endpoint: str
    api_key_env: str = "OPENAI_API_KEY"
    backoff_base: float = 0.5
    _client: httpx.Client | None = None

    def _http(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client()
        return self._client

    def complete(self, messages: Sequence[ChatMessage], gen: GenerationConfig, key: CallKey) -> str:
        url = self.endpoint.rstrip("/") + "/v1/chat/completions"
        body = {
            "model": gen.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": gen.temperature,
            "max_tokens": gen.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        retries = 0
        delay = self.backoff_base
        while True:
            failure: str | None = None
            try:
                resp = self._http().post(url, json=body, headers=headers, timeout=gen.request_timeout)
            except httpx.HTTPError as exc:
                failure = f"transport failure: {exc}"
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()["choices"][0]["message"]["content"]
                    except (KeyError, IndexError, ValueError) as exc:
                        raise TransportError(f"malformed completion payload from {url}: {exc}") from exc
                if resp.status_code not in _RETRYABLE_STATUS:
                    raise TransportError(f"HTTP {resp.status_code} from {url}: {resp.text[:200]}")
                failure = f"HTTP {resp.status_code}"
            retries += 1
            if retries > gen.retry_budget:
                raise TransportError(f"{failure} after {gen.retry_budget} retries ({url})")
            time.sleep(delay)
            delay *= 2
