from __future__ import annotations

from pathlib import Path

import pytest

from reactfn.reaction import self_consistency_error

SELF_CONSISTENCY_TOL = 1e-9

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def assert_self_consistent(curve):
    err = self_consistency_error(curve)
    assert err <= SELF_CONSISTENCY_TOL, f"reconstruction error {err:.3e}"


def record(criterion: str, passed: bool, detail: str = "") -> None:
    """Log an acceptance outcome for the end-of-run table, then assert it."""
    _ACCEPTANCE.append((criterion, passed, detail))
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    assert passed, f"{criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, text: str) -> Path:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return _write


@pytest.fixture
def two_session_minutes(write_file):
    """Two trading days of 1-minute prices, 09:30-10:30, with a gap in day two."""
    lines = ["timestamp,price"]
    price = 100.0
    for day in ("2021-03-04", "2021-03-05"):
        for m in range(61):
            if day == "2021-03-05" and m in (7, 8, 33):
                continue
            hh, mm = divmod(9 * 60 + 30 + m, 60)
            price *= 1.0 + 0.0005 * ((m * 7) % 5 - 2)
            lines.append(f"{day}T{hh:02d}:{mm:02d}:00,{price:.6f}")
    return write_file("minutes.csv", "\n".join(lines) + "\n")
