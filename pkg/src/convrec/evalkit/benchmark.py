"""Run sessions over a sample set and assemble the benchmark outputs.

Outputs per run: ``records.jsonl`` (one session per line, ordered by sample
id), ``metrics.json``, and a plain-text ``report.txt``. Under scripted
backends the whole pipeline is deterministic byte-for-byte, regardless of the
concurrency bound.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..core import SessionStatus, is_terminal
from ..errors import (
    AgentFailureError,
    MalformedOutputError,
    ProfileBuildError,
    ReplayMissError,
    ScriptGapError,
    TransportError,
)
from ..gateway import Gateway
from ..simulation import EvalSample, judge_acceptance, simulate_user
from .analyses import act_distribution, cumulative_success
from .config import RunConfig
from .engine import TurnEngine
from .metrics import average_turns, hit_ratio, success_rate
from .records import (
    OUTCOME_ABORTED,
    OUTCOME_SUCCESS,
    OUTCOME_UNSUCCESSFUL,
    SessionRecord,
    TurnRecord,
    compute_hits,
    write_records_jsonl,
)

log = logging.getLogger(__name__)

_SESSION_FAILURES = (
    TransportError,
    ReplayMissError,
    ScriptGapError,
    AgentFailureError,
    MalformedOutputError,
    ProfileBuildError,
)


@dataclass(frozen=True)
class BenchmarkReport:
    records: tuple[SessionRecord, ...]
    metrics: dict
    report_text: str

    @property
    def aborted(self) -> int:
        return sum(1 for r in self.records if r.aborted)


def run_session(sample: EvalSample, config: RunConfig, gateway: Gateway) -> SessionRecord:
    """Drive one simulated session to its terminal state.

    Gateway failures abort the session: the partial record is flagged and
    later excluded from metric denominators.
    """
    sample.require_prepared()

    def judge(response, feedback, turn_index):
        return judge_acceptance(response, sample.target, feedback)

    engine = TurnEngine(config, gateway, session_id=sample.sample_id, judge=judge)
    error: str | None = None
    state = None
    try:
        opening = simulate_user(sample, None, None, gateway)
        state, _response = engine.open_session(opening)
        while not is_terminal(state):
            feedback = simulate_user(sample, state, state.pending_system, gateway)
            state, _response = engine.advance(state, feedback)
    except _SESSION_FAILURES as exc:
        error = f"{type(exc).__name__}: {exc}"
        log.error("session %s aborted: %s", sample.sample_id, error)

    turns = tuple(_turn_record(trace) for trace in engine.traces)
    base = dict(
        sample_id=sample.sample_id,
        config_id=config.config_id,
        mode=config.mode.value,
        max_turns=config.max_turns,
        fallback_size=config.fallback_size,
        hit_ks=config.hit_ks,
        target_id=sample.target.id,
        target_title=sample.target.title,
        turns=turns,
        opening_utterance=sample.first_utterance or "",
    )
    if error is not None:
        return SessionRecord(outcome=OUTCOME_ABORTED, error=error, **base)
    assert state is not None
    if state.status is SessionStatus.SUCCESS:
        success_turn = state.turns[-1].index
        return SessionRecord(outcome=OUTCOME_SUCCESS, success_turn=success_turn, nt=success_turn, **base)
    fallback_list = state.turns[-1].system_response.recommendations
    nt = config.max_turns + 1 if config.count_fallback_turn else config.max_turns
    return SessionRecord(
        outcome=OUTCOME_UNSUCCESSFUL,
        fallback_list=fallback_list,
        hits=compute_hits(fallback_list, sample.target.title, config.hit_ks),
        nt=nt,
        **base,
    )


def _turn_record(trace: dict) -> TurnRecord:
    return TurnRecord(
        index=trace["index"],
        act=trace["act"],
        system_text=trace["system_text"],
        recommendations=tuple(trace["recommendations"]),
        user_feedback=trace["user_feedback"],
        acceptance=trace["acceptance"],
        profile_before=trace["profile_before"],
        candidates=trace["candidates"],
        planner_rationale=trace["planner_rationale"],
        parse_fallback_used=trace["parse_fallback_used"],
        info_reflection=trace["info_reflection"],
        strategy_reflection=trace["strategy_reflection"],
    )


def run_benchmark(
    samples: Sequence[EvalSample],
    config: RunConfig,
    gateway: Gateway,
    out_dir: str | Path | None = None,
) -> BenchmarkReport:
    """Run every sample under the concurrency bound and assemble the report."""
    ordered = sorted(samples, key=lambda s: s.sample_id)
    if config.concurrency == 1:
        records = [run_session(sample, config, gateway) for sample in ordered]
    else:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            records = list(pool.map(lambda s: run_session(s, config, gateway), ordered))
    records.sort(key=lambda r: r.sample_id)
    metrics = build_metrics(records, config)
    report_text = format_report(records, metrics, config)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records_jsonl(records, out / "records.jsonl")
        (out / "metrics.json").write_text(json.dumps(metrics, indent=1, sort_keys=True), encoding="utf-8")
        (out / "report.txt").write_text(report_text, encoding="utf-8")
    return BenchmarkReport(records=tuple(records), metrics=metrics, report_text=report_text)


def build_metrics(records: Sequence[SessionRecord], config: RunConfig | None = None) -> dict:
    """The metrics.json payload for a record set (aborted records set aside)."""
    usable = [r for r in records if not r.aborted]
    aborted = len(records) - len(usable)
    hit_ks = config.hit_ks if config is not None else (records[0].hit_ks if records else (5, 10))
    metrics: dict = {
        "n": len(usable),
        "aborted": aborted,
        "n_success": sum(1 for r in usable if r.outcome == OUTCOME_SUCCESS),
    }
    if usable:
        metrics["success_rate"] = success_rate(usable)
        metrics["hit_ratio"] = {str(k): hit_ratio(usable, k) for k in hit_ks}
        metrics["average_turns"] = average_turns(usable)
        metrics["act_distribution"] = {str(t): dist for t, dist in act_distribution(usable).items()}
        metrics["cumulative_success"] = cumulative_success(usable)
    return metrics


def format_report(records: Sequence[SessionRecord], metrics: dict, config: RunConfig) -> str:
    """Plain-text summary table (success rate, average turns, hit ratios)."""
    lines = [
        "conversational recommendation benchmark",
        f"config: mode={config.mode.value} max_turns={config.max_turns} fallback_size={config.fallback_size} "
        f"nt_unsuccessful={config.max_turns + 1 if config.count_fallback_turn else config.max_turns}",
        "note: act ratios per turn are computed over sessions still active at that turn",
        f"samples: {metrics['n']}   aborted: {metrics['aborted']}",
        "",
    ]
    ks = sorted(int(k) for k in metrics.get("hit_ratio", {}))
    header = f"{'Method':<16}{'Success Rate':>14}{'Average Turns':>15}" + "".join(f"{'Hit Ratio@' + str(k):>14}" for k in ks)
    lines.append(header)
    if metrics.get("n"):
        row = f"{config.config_id:<16}{metrics['success_rate']:>14.2f}{metrics['average_turns']:>15.2f}"
        row += "".join(f"{metrics['hit_ratio'][str(k)]:>14.2f}" for k in ks)
        lines.append(row)
    else:
        lines.append("(no usable sessions)")
    return "\n".join(lines) + "\n"
