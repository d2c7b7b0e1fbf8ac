"""Collects the one-line acceptance verdicts and prints them after the run."""

import pytest

ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def acceptance_line():
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"criterion {number:2d} {status}  {title}" + (f"  ({detail})" if detail else "")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
