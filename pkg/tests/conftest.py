import numpy as np
import pytest

from pshdef.domains import EXAMPLE6_R
from pshdef.expr import parse

_ACCEPT_LINES = []


def record_acceptance(label: str, ok: bool, detail: str) -> str:
    line = f"[ACCEPT] {label}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    _ACCEPT_LINES.append(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if _ACCEPT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPT_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def r6():
    return parse(EXAMPLE6_R)


@pytest.fixture(scope="session")
def ball():
    return parse("abs2(z)+abs2(w)-1")


@pytest.fixture(scope="session")
def halfspace():
    return parse("Im(w)")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
