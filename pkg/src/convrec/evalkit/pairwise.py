"""Pairwise response evaluation with position-bias control.

Each pair is judged twice with the response order swapped; the two passes
must agree (in original coordinates) for a win, otherwise the pair is a tie.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..gateway import Gateway, extract_tagged_line

log = logging.getLogger(__name__)

_REMIND_VERDICT = "\n\nReminder: your previous reply was unusable. Output exactly one line `VERDICT: <A|B|tie>`."


class PairwiseOutcome(str, Enum):
    A_WINS = "a_wins"
    TIE = "tie"
    B_WINS = "b_wins"


@dataclass(frozen=True)
class ComparisonResult:
    outcome: PairwiseOutcome
    flagged: bool = False


def compare_responses(
    context: str,
    response_a: str,
    response_b: str,
    gateway: Gateway,
    *,
    pair_id: str,
) -> ComparisonResult:
    """Judge a response pair on the four criteria, order-swapped twice.

    An unparseable verdict (after one format-reminder reprompt) makes the
    whole comparison a flagged tie.
    """
    first = _one_pass(context, response_a, response_b, gateway, pair_id=pair_id, turn_index=1)
    if first is None:
        return ComparisonResult(PairwiseOutcome.TIE, flagged=True)
    swapped = _one_pass(context, response_b, response_a, gateway, pair_id=pair_id, turn_index=2)
    if swapped is None:
        return ComparisonResult(PairwiseOutcome.TIE, flagged=True)
    second = {PairwiseOutcome.A_WINS: PairwiseOutcome.B_WINS, PairwiseOutcome.B_WINS: PairwiseOutcome.A_WINS}.get(swapped, swapped)
    if first is second:
        return ComparisonResult(first)
    return ComparisonResult(PairwiseOutcome.TIE)


def _one_pass(
    context: str, first_response: str, second_response: str, gateway: Gateway, *, pair_id: str, turn_index: int
) -> PairwiseOutcome | None:
    bindings = {"context": context, "response_a": first_response, "response_b": second_response, "reminder": ""}
    raw = gateway.generate("evaluator.pairwise", bindings, session_id=pair_id, turn_index=turn_index)
    verdict = _parse_verdict(raw)
    if verdict is None:
        bindings = dict(bindings, reminder=_REMIND_VERDICT)
        raw = gateway.generate("evaluator.pairwise", bindings, session_id=pair_id, turn_index=turn_index)
        verdict = _parse_verdict(raw)
        if verdict is None:
            log.warning("pairwise verdict unparseable twice for pair %s pass %d", pair_id, turn_index)
    return verdict


def _parse_verdict(raw: str) -> PairwiseOutcome | None:
    values = extract_tagged_line(raw, "VERDICT")
    if len(values) != 1:
        return None
    value = values[0].strip().strip("`'\".").lower()
    return {"a": PairwiseOutcome.A_WINS, "b": PairwiseOutcome.B_WINS, "tie": PairwiseOutcome.TIE}.get(value)


def tally(outcomes: Sequence[PairwiseOutcome]) -> dict[str, float]:
    """Percentages (one decimal) of wins/ties/losses over a comparison set."""
    if not outcomes:
        return {"a_wins_pct": 0.0, "tie_pct": 0.0, "b_wins_pct": 0.0}
    n = len(outcomes)
    return {
        "a_wins_pct": round(100 * sum(1 for o in outcomes if o is PairwiseOutcome.A_WINS) / n, 1),
        "tie_pct": round(100 * sum(1 for o in outcomes if o is PairwiseOutcome.TIE) / n, 1),
        "b_wins_pct": round(100 * sum(1 for o in outcomes if o is PairwiseOutcome.B_WINS) / n, 1),
    }


def format_tally(percentages: dict[str, float]) -> str:
    return f"{percentages['a_wins_pct']:.1f}%/{percentages['tie_pct']:.1f}%/{percentages['b_wins_pct']:.1f}%"
