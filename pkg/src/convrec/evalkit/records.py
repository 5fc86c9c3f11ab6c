"""Benchmark session records and their JSON-Lines serialization.

A record holds the full per-turn transcript (all three candidates, planner
rationale, reflection artifacts) plus the outcome, so metrics can always be
recounted from raw transcripts. Records carry no wall-clock data: identical
inputs must serialize byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..core import UserProfile
from ..errors import ContractError
from ..titles import titles_equal

OUTCOME_SUCCESS = "success"
OUTCOME_UNSUCCESSFUL = "unsuccessful"
OUTCOME_ABORTED = "aborted"


@dataclass(frozen=True)
class CandidateTrace:
    act: str
    text: str
    recommendations: tuple[str, ...] = ()


@dataclass(frozen=True)
class TurnRecord:
    index: int
    act: str
    system_text: str
    recommendations: tuple[str, ...]
    user_feedback: str
    acceptance: str
    profile_before: dict
    candidates: tuple[CandidateTrace, ...] | None = None
    planner_rationale: str | None = None
    parse_fallback_used: bool = False
    info_reflection: dict | None = None
    strategy_reflection: dict | None = None


@dataclass(frozen=True)
class SessionRecord:
    sample_id: str
    config_id: str
    mode: str
    max_turns: int
    fallback_size: int
    hit_ks: tuple[int, ...]
    target_id: str
    target_title: str
    turns: tuple[TurnRecord, ...]
    outcome: str
    opening_utterance: str = ""
    success_turn: int | None = None
    fallback_list: tuple[str, ...] | None = None
    hits: dict[int, int] | None = None
    nt: int | None = None
    error: str | None = None

    def __post_init__(self) -> None:
        if self.outcome == OUTCOME_SUCCESS:
            if self.success_turn is None or self.success_turn > self.max_turns:
                raise ContractError("a success must happen by max_turns")
        if self.outcome == OUTCOME_UNSUCCESSFUL and self.fallback_list is None:
            raise ContractError("an unsuccessful record needs its fallback list")

    @property
    def aborted(self) -> bool:
        return self.outcome == OUTCOME_ABORTED


def compute_hits(fallback_list: Sequence[str], target_title: str, ks: Iterable[int]) -> dict[int, int]:
    """hit(i) per K: 1 iff the target appears in the top-K of the fallback list."""
    return {
        k: int(any(titles_equal(title, target_title) for title in fallback_list[: min(k, len(fallback_list))]))
        for k in ks
    }


def profile_to_dict(profile: UserProfile) -> dict:
    return {"demand": dict(profile.demand), "browsing_history": list(profile.browsing_history)}


def record_to_dict(record: SessionRecord) -> dict:
    return {
        "sample_id": record.sample_id,
        "config_id": record.config_id,
        "mode": record.mode,
        "max_turns": record.max_turns,
        "fallback_size": record.fallback_size,
        "hit_ks": list(record.hit_ks),
        "target_id": record.target_id,
        "target_title": record.target_title,
        "outcome": record.outcome,
        "opening_utterance": record.opening_utterance,
        "success_turn": record.success_turn,
        "fallback_list": list(record.fallback_list) if record.fallback_list is not None else None,
        "hits": {str(k): v for k, v in record.hits.items()} if record.hits is not None else None,
        "nt": record.nt,
        "error": record.error,
        "turns": [
            {
                "index": t.index,
                "act": t.act,
                "system_text": t.system_text,
                "recommendations": list(t.recommendations),
                "user_feedback": t.user_feedback,
                "acceptance": t.acceptance,
                "profile_before": t.profile_before,
                "candidates": [
                    {"act": c.act, "text": c.text, "recommendations": list(c.recommendations)} for c in t.candidates
                ]
                if t.candidates is not None
                else None,
                "planner_rationale": t.planner_rationale,
                "parse_fallback_used": t.parse_fallback_used,
                "info_reflection": t.info_reflection,
                "strategy_reflection": t.strategy_reflection,
            }
            for t in record.turns
        ],
    }


def record_from_dict(data: dict) -> SessionRecord:
    return SessionRecord(
        sample_id=data["sample_id"],
        config_id=data["config_id"],
        mode=data["mode"],
        max_turns=data["max_turns"],
        fallback_size=data["fallback_size"],
        hit_ks=tuple(data["hit_ks"]),
        target_id=data["target_id"],
        target_title=data["target_title"],
        outcome=data["outcome"],
        opening_utterance=data.get("opening_utterance", ""),
        success_turn=data.get("success_turn"),
        fallback_list=tuple(data["fallback_list"]) if data.get("fallback_list") is not None else None,
        hits={int(k): v for k, v in data["hits"].items()} if data.get("hits") is not None else None,
        nt=data.get("nt"),
        error=data.get("error"),
        turns=tuple(
            TurnRecord(
                index=t["index"],
                act=t["act"],
                system_text=t["system_text"],
                recommendations=tuple(t["recommendations"]),
                user_feedback=t["user_feedback"],
                acceptance=t["acceptance"],
                profile_before=t["profile_before"],
                candidates=tuple(
                    CandidateTrace(act=c["act"], text=c["text"], recommendations=tuple(c["recommendations"]))
                    for c in t["candidates"]
                )
                if t.get("candidates") is not None
                else None,
                planner_rationale=t.get("planner_rationale"),
                parse_fallback_used=t.get("parse_fallback_used", False),
                info_reflection=t.get("info_reflection"),
                strategy_reflection=t.get("strategy_reflection"),
            )
            for t in data["turns"]
        ),
    )


def record_to_json(record: SessionRecord) -> str:
    return json.dumps(record_to_dict(record), sort_keys=True, separators=(",", ":"))


def write_records_jsonl(records: Sequence[SessionRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_json(record) + "\n")


def read_records_jsonl(path: str | Path) -> list[SessionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_dict(json.loads(line)))
    return records
