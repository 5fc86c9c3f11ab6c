"""Benchmark metrics over session records.

success_rate = N_su / N. hit_ratio@K = (sum of top-K fallback hits over the
unsuccessful samples + N_su) / N. average_turns = sum(NT_i) / N.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import MetricError
from ..titles import titles_equal
from .records import OUTCOME_SUCCESS, SessionRecord


def _checked(records: Sequence[SessionRecord]) -> Sequence[SessionRecord]:
    if not records:
        raise MetricError("metrics are undefined over an empty record set")
    aborted = [r.sample_id for r in records if r.aborted]
    if aborted:
        raise MetricError(f"{len(aborted)} aborted records present (e.g. {aborted[0]}); exclude them first")
    return records


def success_rate(records: Sequence[SessionRecord]) -> float:
    records = _checked(records)
    return sum(1 for r in records if r.outcome == OUTCOME_SUCCESS) / len(records)


def hit_ratio(records: Sequence[SessionRecord], k: int) -> float:
    records = _checked(records)
    total = 0
    for record in records:
        if record.outcome == OUTCOME_SUCCESS:
            total += 1
            continue
        if record.fallback_list is None:
            raise MetricError(f"unsuccessful record {record.sample_id} has no fallback list")
        top = record.fallback_list[: min(k, len(record.fallback_list))]
        total += int(any(titles_equal(title, record.target_title) for title in top))
    return total / len(records)


def average_turns(records: Sequence[SessionRecord]) -> float:
    records = _checked(records)
    for record in records:
        if record.nt is None:
            raise MetricError(f"record {record.sample_id} has no turn count")
    return sum(record.nt for record in records) / len(records)
