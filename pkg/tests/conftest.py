from __future__ import annotations

import pytest


# Acceptance criteria register one line each here; printed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    def record(label: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
