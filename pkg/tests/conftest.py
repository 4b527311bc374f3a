from __future__ import annotations

import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record ``(criterion, ok, detail)``; lines are printed at the end of the session."""

    def record(criterion: int, ok: bool, detail: str) -> bool:
        line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS.append(line)
        print(line, flush=True)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
