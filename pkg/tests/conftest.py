import pytest

from covert_aoi.model import SystemParams

ACCEPTANCE_LINES = []


@pytest.fixture
def sec5():
    """Numerical-results setting with 0 dBm powers."""
    return SystemParams()


@pytest.fixture
def report():
    def record(criterion: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f": {detail}" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
