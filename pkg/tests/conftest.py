import math

import pytest

from discordflow.dynamics import SystemParams

ACCEPTANCE_LINES = []


@pytest.fixture
def reference_params():
    return SystemParams.from_ratio(3.0, 1.0 / math.sqrt(3.0))


@pytest.fixture
def acceptance_line():
    def record(criterion: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
