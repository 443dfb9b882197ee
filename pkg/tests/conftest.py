from __future__ import annotations

import numpy as np
import pytest

from liespec import linalg_core as la
from liespec.instances import EXAMPLE_A, EXAMPLE_B, builtin_example
from liespec.linalg_core import EXACT, FLOAT


def exact(rows):
    return la.as_matrix(np.array(rows, dtype=object), EXACT)


@pytest.fixture
def a_exact():
    return exact(EXAMPLE_A)


@pytest.fixture
def b_exact():
    return exact(EXAMPLE_B)


@pytest.fixture(params=[EXACT, FLOAT])
def backend(request):
    return request.param


@pytest.fixture
def example(backend):
    return builtin_example(backend)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
