"""Prints one pass/fail line per acceptance criterion after the run."""

import re

_CRITERION = re.compile(
    r"test_acceptance\.py::test_criterion_(\d+)_([a-z0-9_]+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome, flag in (("passed", "PASS"), ("failed", "FAIL"),
                          ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            found = _CRITERION.search(getattr(report, "nodeid", ""))
            if found and getattr(report, "when", "call") == "call":
                number = int(found.group(1))
                label = found.group(2).replace("_", " ")
                rows.append((number, label, flag))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, flag in sorted(rows):
        terminalreporter.write_line(
            f"criterion {number:2d} ({label}): {flag}")
