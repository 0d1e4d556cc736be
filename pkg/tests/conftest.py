"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

import pytest

# criterion number -> list of (ok, detail) from each sub-check
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str):
    ACCEPTANCE.setdefault(criterion, []).append((ok, detail))
    print(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(c for c, _ in checks)
        detail = "; ".join(d for c, d in checks if not c) if not ok else "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
