"""Shared fixtures and the acceptance-summary hook.

Tests in test_acceptance.py register one line per criterion via the
``acceptance`` fixture; the summary is printed at the end of the run so
each criterion shows up as an explicit PASS/FAIL line.
"""

from __future__ import annotations

import pytest

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


class _AcceptanceRecorder:
    def record(self, name: str, passed: bool) -> None:
        _ACCEPTANCE_RESULTS.append((name, "PASS" if passed else "FAIL"))


@pytest.fixture
def acceptance():
    return _AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{verdict}  {name}")
