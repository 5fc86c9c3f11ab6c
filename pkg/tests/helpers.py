"""Shared fixtures: sample factories and scripted-backend session builders.

`session_script` turns a per-turn plan into the exact scripted table a full
engine run consumes, so tests can declare sessions ("ask, then a rejected
recommendation, then success") instead of hand-writing table keys.
"""

from __future__ import annotations

from dataclasses import dataclass

from convrec.core import Item
from convrec.gateway import Gateway, ScriptedBackend
from convrec.simulation import EvalSample, TargetProfile
from convrec.titles import titles_equal

DEFAULT_KEYWORDS = ("tense heist", "neo noir mood", "ensemble cast")
DEFAULT_INFO_BLOCK = "DEMAND:\n- genre: thriller\nHISTORY:"
DEFAULT_STRATEGY_BLOCK = (
    "WHY_FAILED: The recommendation ignored the user's era preference.\n"
    "SUGGESTION_ASK: probe release-era preference\n"
    "SUGGESTION_REC: favor nineties titles\n"
    "SUGGESTION_CHAT: bring up classic heist films\n"
    "EXPERIENCE: prefer asking about era before recommending again"
)


def make_item(item_id: str, title: str, genres=("thriller",), interactions: int = 0) -> Item:
    return Item(id=item_id, title=title, genres=frozenset(genres), interaction_count=interactions)


def make_sample(
    sample_id: str = "s000",
    target_title: str = "Golden Reel",
    n_history: int = 5,
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS,
    first_utterance: str = "hi, I want a tense crime movie",
) -> EvalSample:
    target = make_item(f"{sample_id}-target", target_title)
    history = tuple(make_item(f"{sample_id}-h{k}", f"Archive Film {sample_id}-{k}") for k in range(n_history))
    return EvalSample(
        sample_id=sample_id,
        browsing_history=history,
        target=target,
        target_profile=TargetProfile(item=target, keywords=keywords),
        first_utterance=first_utterance,
    )


@dataclass
class TurnPlan:
    """One planned turn of a scripted session."""

    act: str = "ask"  # planner selection: ask | recommend | chat
    rec_title: str = "Decoy Pick"  # what the recommending agent drafts
    feedback: str = "hmm, not quite what I had in mind."
    ask_text: str | None = None
    chat_text: str | None = None
    rec_text: str | None = None
    planner_raw: str | None = None
    info_block: str | None = None
    strategy_block: str | None = None


def accepted_feedback() -> str:
    return "yes, that is exactly it, thanks!\nACCEPT: yes"


def session_script(
    sample: EvalSample,
    plans: list[TurnPlan],
    fallback: list[str] | None = None,
    mode: str = "macrs",
) -> dict:
    """Scripted-table entries for one full session under the given mode."""
    sid = sample.sample_id
    ir = mode in ("macrs", "macrs_wo_sr")
    sr = mode in ("macrs", "macrs_wo_ir")
    script: dict = {}
    for t, plan in enumerate(plans, start=1):
        ask_text = plan.ask_text or f"Could you tell me more about what you enjoy? (turn {t})"
        chat_text = plan.chat_text or f"A good movie night is hard to beat. (turn {t})"
        rec_text = plan.rec_text or f"How about {plan.rec_title}? It fits what you described."
        if mode == "single_agent":
            if plan.act == "recommend":
                script[("baseline.single_agent", sid, t)] = f"{rec_text}\nRECOMMEND: {plan.rec_title}"
            elif plan.act == "ask":
                script[("baseline.single_agent", sid, t)] = ask_text
            else:
                script[("baseline.single_agent", sid, t)] = chat_text
        else:
            script[("responder.ask", sid, t)] = ask_text
            script[("responder.chat", sid, t)] = chat_text
            script[("responder.rec", sid, t)] = f"{rec_text}\nRECOMMEND: {plan.rec_title}"
            script[("planner", sid, t)] = plan.planner_raw or f"SELECTED: {plan.act}"
        accepted = plan.act == "recommend" and titles_equal(plan.rec_title, sample.target.title)
        script[("simulator.user", sid, t)] = accepted_feedback() if accepted else plan.feedback
        if ir:
            script[("reflect.info", sid, t)] = plan.info_block or DEFAULT_INFO_BLOCK
        if sr and plan.act == "recommend" and not accepted:
            script[("reflect.strategy", sid, t)] = plan.strategy_block or DEFAULT_STRATEGY_BLOCK
    if fallback is not None:
        lines = "\n".join(f"RECOMMEND: {title}" for title in fallback)
        script[("responder.rec", sid, len(plans) + 1)] = f"Here is a final list for you.\n{lines}"
    return script


def make_gateway(script: dict) -> Gateway:
    return Gateway(ScriptedBackend(script))


def fallback_titles(sid: str, target_title: str | None = None, target_rank: int | None = None, size: int = 10) -> list[str]:
    """A fallback list of distinct fillers, optionally placing the target at a 1-based rank."""
    titles = [f"List Filler {sid}-{j}" for j in range(1, size + 1)]
    if target_rank is not None:
        assert target_title is not None and 1 <= target_rank <= size
        titles[target_rank - 1] = target_title
    return titles
