"""Benchmark harness: session controller, metrics, analyses, and reports."""

from .analyses import act_distribution, act_repetition_runs, cumulative_success, popularity_report
from .benchmark import BenchmarkReport, build_metrics, format_report, run_benchmark, run_session
from .config import RunConfig, SystemMode
from .engine import TurnEngine
from .metrics import average_turns, hit_ratio, success_rate
from .pairwise import ComparisonResult, PairwiseOutcome, compare_responses, format_tally, tally
from .records import (
    OUTCOME_ABORTED,
    OUTCOME_SUCCESS,
    OUTCOME_UNSUCCESSFUL,
    SessionRecord,
    TurnRecord,
    compute_hits,
    read_records_jsonl,
    record_from_dict,
    record_to_dict,
    write_records_jsonl,
)

__all__ = [
    "BenchmarkReport",
    "ComparisonResult",
    "OUTCOME_ABORTED",
    "OUTCOME_SUCCESS",
    "OUTCOME_UNSUCCESSFUL",
    "PairwiseOutcome",
    "RunConfig",
    "SessionRecord",
    "SystemMode",
    "TurnEngine",
    "TurnRecord",
    "act_distribution",
    "act_repetition_runs",
    "average_turns",
    "build_metrics",
    "compare_responses",
    "compute_hits",
    "cumulative_success",
    "format_report",
    "format_tally",
    "hit_ratio",
    "popularity_report",
    "read_records_jsonl",
    "record_from_dict",
    "record_to_dict",
    "run_benchmark",
    "run_session",
    "success_rate",
    "tally",
    "write_records_jsonl",
]
