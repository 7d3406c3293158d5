"""Shared test plumbing: collect acceptance verdict lines for the summary."""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Recorder for acceptance outcomes: one verdict line per criterion.

    Records the PASS/FAIL line first so a failing criterion still shows up
    in the terminal summary, then asserts.
    """

    def record(number, label, ok, detail):
        status = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"criterion {number} ({label}): {status} ({detail})")
        assert ok, f"criterion {number} ({label}): {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance checks")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
