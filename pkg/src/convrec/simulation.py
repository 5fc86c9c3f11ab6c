"""LLM user simulator, target-item keyword profiles, and acceptance judging.

The simulator never sees the target title: it gets a keyword profile instead,
and every dialogue line rendered into its prompt is redacted before use. In
benchmark runs acceptance is a deterministic title match against the target;
the LLM judge exists only for interactive sessions, where no target is known.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .core import Acceptance, DialogueAct, Item, SessionState, SystemResponse
from .errors import ContractError, InvalidInputError, ProfileBuildError
from .gateway import Gateway, extract_tagged_line, parse_bullets
from .rendering import dialogue_lines, render_lines
from .titles import contains_title, redact_title, titles_equal

log = logging.getLogger(__name__)

MIN_KEYWORDS = 3
MAX_KEYWORDS = 10

_TARGET_STANDIN = "[the movie I am looking for]"
_ACCEPT_DIRECTIVE = (
    "The assistant's latest recommendation is exactly the movie you are looking for."
    " Accept it in your reply and include one line of the form `ACCEPT: yes`.\n\n"
)
_OPENING_DIRECTIVE = (
    "The conversation has not started yet. Write your opening message to the assistant,"
    " describing vaguely what you are in the mood for.\n\n"
)


class VerdictSignal(str, Enum):
    TITLE_MATCH = "title_match"
    MARKER = "marker"
    JUDGE = "judge"


@dataclass(frozen=True)
class Verdict:
    """Did the user take the recommendation?"""

    outcome: Acceptance
    signal: VerdictSignal
    matched_title: str | None = None
    disagreement: bool = False

    def __post_init__(self) -> None:
        if self.outcome not in (Acceptance.ACCEPTED, Acceptance.REJECTED):
            raise ContractError("a verdict is either accepted or rejected")
        if self.outcome is Acceptance.ACCEPTED and self.matched_title is None and self.signal is VerdictSignal.TITLE_MATCH:
            raise ContractError("a title-match accept must carry the matched title")


@dataclass(frozen=True)
class TargetProfile:
    """Keyword stand-in for the target item, shared across all compared systems."""

    item: Item
    keywords: tuple[str, ...]
    cached: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if not MIN_KEYWORDS <= len(self.keywords) <= MAX_KEYWORDS:
            raise ContractError(f"target profile needs {MIN_KEYWORDS}-{MAX_KEYWORDS} keywords, got {len(self.keywords)}")
        for kw in self.keywords:
            if contains_title(kw, self.item.title):
                raise ContractError(f"keyword {kw!r} leaks the target title")


@dataclass(frozen=True)
class EvalSample:
    """One benchmark case: a browsing history and the hidden target item."""

    sample_id: str
    browsing_history: tuple[Item, ...]
    target: Item
    target_profile: TargetProfile | None = None
    first_utterance: str | None = None

    def __post_init__(self) -> None:
        if not 5 <= len(self.browsing_history) <= 20:
            raise InvalidInputError(f"browsing history must have 5-20 items, got {len(self.browsing_history)}")
        for item in self.browsing_history:
            if item.id == self.target.id or titles_equal(item.title, self.target.title):
                raise InvalidInputError("target must not appear in the browsing history")

    def require_prepared(self) -> None:
        if self.target_profile is None or not self.first_utterance:
            raise ContractError(f"sample {self.sample_id} lacks a target profile or first utterance; run prepare first")


def build_target_profile(item: Item, gateway: Gateway, cache_dir: str | Path | None = None) -> TargetProfile:
    """Summarize an item into keywords, dropping any that leak the title.

    Results are cached on disk per item id so every system and ablation run
    shares the same summary.
    """
    cache_file = Path(cache_dir) / f"{item.id}.json" if cache_dir is not None else None
    if cache_file is not None and cache_file.exists():
        data = json.loads(cache_file.read_text(encoding="utf-8"))
        return TargetProfile(item=item, keywords=tuple(data["keywords"]), cached=True)
    raw = gateway.generate(
        "simulator.profile",
        {"title": item.title, "genres": ", ".join(sorted(item.genres)) or "(unknown)"},
        session_id=f"profile:{item.id}",
        turn_index=0,
    )
    keywords = []
    for kw in parse_bullets(raw):
        if contains_title(kw, item.title):
            log.info("dropping title-leaking keyword %r for item %s", kw, item.id)
            continue
        keywords.append(kw)
    if len(keywords) < MIN_KEYWORDS:
        raise ProfileBuildError(
            f"item {item.id}: only {len(keywords)} usable keywords after dropping title leaks"
        )
    profile = TargetProfile(item=item, keywords=tuple(keywords[:MAX_KEYWORDS]))
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        cache_file.write_text(
            json.dumps({"item_id": item.id, "title": item.title, "keywords": list(profile.keywords)}, indent=1),
            encoding="utf-8",
        )
    return profile


def generate_first_utterance(sample: EvalSample, gateway: Gateway) -> str:
    """The user's opening message, generated once per sample and then frozen."""
    sample_profile = sample.target_profile
    if sample_profile is None:
        raise ContractError("build the target profile before the first utterance")
    prompt_bindings = _simulator_bindings(sample, dialogue="(no messages yet)", directive=_OPENING_DIRECTIVE)
    _assert_no_leak(sample, gateway, prompt_bindings)
    return gateway.generate(
        "simulator.user", prompt_bindings, session_id=f"opening:{sample.sample_id}", turn_index=0
    )


def simulate_user(
    sample: EvalSample,
    state: SessionState | None,
    system_response: SystemResponse | None,
    gateway: Gateway,
) -> str:
    """The user's next utterance.

    The turn-1 call (no history, no system response yet) returns the sample's
    cached first utterance without touching the gateway, keeping the opening
    identical across every compared system.
    """
    sample.require_prepared()
    if system_response is None:
        if state is not None and state.completed_turns:
            raise ContractError("a system response is required once the dialogue has turns")
        return sample.first_utterance  # type: ignore[return-value]
    if state is None:
        raise ContractError("mid-dialogue simulation needs the session state")

    recommends_target = any(titles_equal(t, sample.target.title) for t in system_response.recommendations)
    directive = _ACCEPT_DIRECTIVE if recommends_target else ""
    lines = dialogue_lines(state, pending=system_response)
    redacted = [(speaker, redact_title(text, sample.target.title, _TARGET_STANDIN)) for speaker, text in lines]
    bindings = _simulator_bindings(sample, dialogue=render_lines(redacted), directive=directive)
    _assert_no_leak(sample, gateway, bindings)
    return gateway.generate(
        "simulator.user", bindings, session_id=sample.sample_id, turn_index=state.current_turn_index
    )


def _simulator_bindings(sample: EvalSample, dialogue: str, directive: str) -> dict[str, str]:
    assert sample.target_profile is not None
    return {
        "browsing_history": "\n".join(f"- {item.title}" for item in sample.browsing_history),
        "keywords": "\n".join(f"- {kw}" for kw in sample.target_profile.keywords),
        "dialogue": dialogue,
        "situation_directive": directive,
    }


def _assert_no_leak(sample: EvalSample, gateway: Gateway, bindings: dict[str, str]) -> None:
    # Target-leak freedom is asserted on every rendered simulator prompt.
    rendered = gateway.registry.render("simulator.user", bindings)
    if contains_title(rendered, sample.target.title):
        raise ContractError(f"simulator prompt for sample {sample.sample_id} leaks the target title")


def sample_to_dict(sample: EvalSample) -> dict:
    return {
        "sample_id": sample.sample_id,
        "browsing_history": [
            {"id": i.id, "title": i.title, "genres": sorted(i.genres), "interaction_count": i.interaction_count}
            for i in sample.browsing_history
        ],
        "target": {
            "id": sample.target.id,
            "title": sample.target.title,
            "genres": sorted(sample.target.genres),
            "interaction_count": sample.target.interaction_count,
        },
        "keywords": list(sample.target_profile.keywords) if sample.target_profile else None,
        "first_utterance": sample.first_utterance,
    }


def _item_from_dict(data: dict) -> Item:
    return Item(
        id=data["id"],
        title=data["title"],
        genres=frozenset(data.get("genres", ())),
        interaction_count=data.get("interaction_count", 0),
    )


def sample_from_dict(data: dict) -> EvalSample:
    target = _item_from_dict(data["target"])
    keywords = data.get("keywords")
    return EvalSample(
        sample_id=data["sample_id"],
        browsing_history=tuple(_item_from_dict(d) for d in data["browsing_history"]),
        target=target,
        target_profile=TargetProfile(item=target, keywords=tuple(keywords), cached=True) if keywords else None,
        first_utterance=data.get("first_utterance"),
    )


def save_sample(sample: EvalSample, directory: str | Path) -> Path:
    path = Path(directory) / f"{sample.sample_id}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(sample_to_dict(sample), indent=1, sort_keys=True), encoding="utf-8")
    return path


def load_samples(directory: str | Path) -> list[EvalSample]:
    """All sample files in a directory, ordered by sample id."""
    samples = []
    for path in sorted(Path(directory).glob("*.json")):
        try:
            samples.append(sample_from_dict(json.loads(path.read_text(encoding="utf-8"))))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"{path} is not a sample file: {exc}") from exc
    samples.sort(key=lambda s: s.sample_id)
    return samples


def judge_acceptance(system_response: SystemResponse, target: Item, user_feedback: str) -> Verdict:
    """Deterministic benchmark ground truth: accept iff a recommended title
    normalized-equals the target title.

    The simulator's ACCEPT marker is only corroborating; a marker without a
    title match resolves to Reject and is logged as a disagreement.
    """
    if system_response.act is not DialogueAct.RECOMMEND:
        raise ContractError("acceptance is judged on recommend turns only")
    matched = next((t for t in system_response.recommendations if titles_equal(t, target.title)), None)
    marker_values = extract_tagged_line(user_feedback, "ACCEPT")
    marker = any(v.lower() not in ("no", "false") for v in marker_values)
    if matched is not None:
        return Verdict(outcome=Acceptance.ACCEPTED, signal=VerdictSignal.TITLE_MATCH, matched_title=matched)
    if marker:
        log.warning("ACCEPT marker without a title match (target %r); resolving to reject", target.title)
        return Verdict(outcome=Acceptance.REJECTED, signal=VerdictSignal.TITLE_MATCH, disagreement=True)
    return Verdict(outcome=Acceptance.REJECTED, signal=VerdictSignal.TITLE_MATCH)


def judge_acceptance_live(
    system_response: SystemResponse,
    user_feedback: str,
    gateway: Gateway,
    *,
    session_id: str,
    turn_index: int,
) -> Verdict:
    """LLM judgment for interactive sessions, where no target is known.

    Unparseable judge output counts as a rejection (the conservative reading).
    """
    if system_response.act is not DialogueAct.RECOMMEND:
        raise ContractError("acceptance is judged on recommend turns only")
    raw = gateway.generate(
        "judge.acceptance",
        {"system_response": system_response.text, "user_reply": user_feedback},
        session_id=session_id,
        turn_index=turn_index,
    )
    values = extract_tagged_line(raw, "ACCEPT")
    accepted = bool(values) and values[0].lower().startswith("yes")
    if accepted:
        matched = system_response.recommendations[0] if system_response.recommendations else None
        return Verdict(outcome=Acceptance.ACCEPTED, signal=VerdictSignal.JUDGE, matched_title=matched)
    return Verdict(outcome=Acceptance.REJECTED, signal=VerdictSignal.JUDGE)
