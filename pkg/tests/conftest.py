import numpy as np
import pytest

from decolab import states as st

ACCEPTANCE_LINES: list[str] = []


def record(line: str) -> None:
    """Store an acceptance line for the end-of-run summary and echo it."""
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def plus():
    return np.array([1, 1], dtype=complex) / np.sqrt(2)


@pytest.fixture
def present_ac():
    """(|00><00| + |11><11|)/2 on A x C: Z fully readable from C."""
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = 0.5
    return st.DensityOperator(m, (2, 2))


@pytest.fixture
def absent_ac(plus):
    """|+><+| x I/2 on A x C: Z invisible to C."""
    return st.DensityOperator(np.kron(np.outer(plus, plus.conj()), np.eye(2) / 2), (2, 2))
