import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from majority_automata import _backend  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(params=sorted(_backend.available()))
def kernel_impl(request):
    return _backend.available()[request.param]


@pytest.fixture
def data_dir():
    return DATA


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
