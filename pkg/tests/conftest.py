"""Pytest wiring: prints one PASS/FAIL line per acceptance criterion."""

from __future__ import annotations

_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or not report.nodeid.split("::")[0].endswith("test_acceptance.py"):
        return
    name = report.nodeid.split("::")[-1].replace("test_", "", 1)
    _acceptance_results.append((name, "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _acceptance_results:
        terminalreporter.write_line(f"[{status}] {name}")
