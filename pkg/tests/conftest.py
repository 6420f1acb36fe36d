"""Shared pytest plumbing: the acceptance scorecard.

The acceptance tests record one PASS/FAIL line each.  The lines print as
soon as they are recorded (visible under ``-s``) and are echoed again in a
terminal summary section, so a plain ``pytest -v`` run ends with the full
scorecard regardless of output capturing.
"""

import pytest

_SCORECARD: list[str] = []


@pytest.fixture(scope="session")
def criterion_report():
    def record(number: int, name: str, ok: bool, detail: str) -> str:
        line = f"[criterion {number:02d}] {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _SCORECARD.append(line)
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _SCORECARD:
        terminalreporter.section("acceptance scorecard")
        for line in _SCORECARD:
            terminalreporter.write_line(line)
