from convrec.evalkit import PairwiseOutcome, compare_responses, format_tally, tally
from convrec.gateway import Gateway, ScriptedBackend

CONTEXT = "User: I want a tense crime movie"


def compare_with(pass1, pass2):
    gateway = Gateway(
        ScriptedBackend({("evaluator.pairwise", "p1", 1): pass1, ("evaluator.pairwise", "p1", 2): pass2})
    )
    result = compare_responses(CONTEXT, "Response with suggestions", "Response without", gateway, pair_id="p1")
    return result, gateway


def test_agreement_both_orders_wins():
    # pass 2 has the responses swapped, so "VERDICT: B" there means original A
    result, gateway = compare_with("VERDICT: A", "VERDICT: B")
    assert result.outcome is PairwiseOutcome.A_WINS
    assert not result.flagged
    assert "recommendation accuracy" in gateway.calls[0].prompt
    assert "user information gain" in gateway.calls[0].prompt
    assert "conciseness" in gateway.calls[0].prompt
    assert "engagement" in gateway.calls[0].prompt


def test_position_bias_disagreement_is_tie():
    # "A" in both orders = the evaluator just prefers the first slot
    result, _ = compare_with("VERDICT: A", "VERDICT: A")
    assert result.outcome is PairwiseOutcome.TIE


def test_explicit_ties_stay_ties():
    result, _ = compare_with("VERDICT: tie", "VERDICT: tie")
    assert result.outcome is PairwiseOutcome.TIE
    assert not result.flagged


def test_unparseable_twice_is_flagged_tie():
    gateway = Gateway(
        ScriptedBackend({("evaluator.pairwise", "p1", 1): ["mush", "more mush"]})
    )
    result = compare_responses(CONTEXT, "A text", "B text", gateway, pair_id="p1")
    assert result.outcome is PairwiseOutcome.TIE
    assert result.flagged


def test_order_swap_actually_swaps_payloads():
    _, gateway = compare_with("VERDICT: A", "VERDICT: B")
    first, second = gateway.calls
    assert "Response A:\nResponse with suggestions" in first.prompt
    assert "Response A:\nResponse without" in second.prompt


def test_tally_matches_known_percentages():
    outcomes = (
        [PairwiseOutcome.A_WINS] * 44 + [PairwiseOutcome.TIE] * 32 + [PairwiseOutcome.B_WINS] * 21
    )
    percentages = tally(outcomes)
    assert percentages == {"a_wins_pct": 45.4, "tie_pct": 33.0, "b_wins_pct": 21.6}
    assert format_tally(percentages) == "45.4%/33.0%/21.6%"
