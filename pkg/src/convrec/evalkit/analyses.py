"""Per-turn and per-popularity analyses over session records."""

from __future__ import annotations

from typing import Mapping, Sequence

from ..data import PopularityLevel
from ..errors import MetricError
from .metrics import hit_ratio, success_rate
from .records import OUTCOME_SUCCESS, SessionRecord


def act_distribution(records: Sequence[SessionRecord]) -> dict[int, dict[str, float]]:
    """Ratio of dialogue acts chosen at each turn index.

    Denominator note: ratios at turn t are over the sessions still active at
    t — sessions that finished earlier drop out, so late turns remain
    meaningful.
    """
    if not records:
        raise MetricError("act distribution is undefined over an empty record set")
    counts: dict[int, dict[str, int]] = {}
    for record in records:
        for turn in record.turns:
            counts.setdefault(turn.index, {})
            counts[turn.index][turn.act] = counts[turn.index].get(turn.act, 0) + 1
    out: dict[int, dict[str, float]] = {}
    for index in sorted(counts):
        total = sum(counts[index].values())
        out[index] = {act: n / total for act, n in sorted(counts[index].items())}
    return out


def cumulative_success(records: Sequence[SessionRecord]) -> list[int]:
    """Cumulative successful-sample counts per turn 1..max_turns."""
    if not records:
        raise MetricError("cumulative success is undefined over an empty record set")
    max_turns = max(r.max_turns for r in records)
    counts = [0] * max_turns
    for record in records:
        if record.outcome == OUTCOME_SUCCESS and record.success_turn is not None:
            for t in range(record.success_turn - 1, max_turns):
                counts[t] += 1
    return counts


def act_repetition_runs(records: Sequence[SessionRecord]) -> dict[int, int]:
    """Histogram of same-act run lengths (>= 2) across sessions.

    Telemetry for the planner's avoid-repetition directive, which is enforced
    in-prompt only.
    """
    runs: dict[int, int] = {}
    for record in records:
        acts = [t.act for t in record.turns]
        i = 0
        while i < len(acts):
            j = i
            while j + 1 < len(acts) and acts[j + 1] == acts[i]:
                j += 1
            length = j - i + 1
            if length >= 2:
                runs[length] = runs.get(length, 0) + 1
            i = j + 1
    return runs


def popularity_report(
    records: Sequence[SessionRecord],
    levels: Mapping[str, PopularityLevel],
    ks: tuple[int, ...] = (5, 10),
) -> dict[str, dict]:
    """Success rate and hit ratios per target-popularity level.

    Levels with no samples are omitted; a note lists them.
    """
    grouped: dict[PopularityLevel, list[SessionRecord]] = {level: [] for level in PopularityLevel}
    for record in records:
        grouped[levels[record.target_id]].append(record)
    report: dict[str, dict] = {}
    empty: list[str] = []
    for level in PopularityLevel:
        subset = grouped[level]
        if not subset:
            empty.append(level.value)
            continue
        report[level.value] = {
            "n": len(subset),
            "success_rate": success_rate(subset),
            "hit_ratio": {str(k): hit_ratio(subset, k) for k in ks},
        }
    if empty:
        report["note"] = {"empty_levels": empty}
    return report
