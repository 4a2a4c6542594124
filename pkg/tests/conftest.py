import numpy as np
import pytest

from eglab.problems import LinearNESpec, MinimaxSpec, gen_linear_ne, gen_quadratic_minimax


@pytest.fixture(scope="session")
def spd50():
    return gen_linear_ne(LinearNESpec(50, 1, "spd"))


@pytest.fixture(scope="session")
def small_spd():
    return gen_linear_ne(LinearNESpec(10, 7, "spd"))


@pytest.fixture(scope="session")
def small_minimax():
    return gen_quadratic_minimax(MinimaxSpec(8, 7, 0.1, 3))


@pytest.fixture(scope="session")
def nonmonotone_minimax():
    return gen_quadratic_minimax(MinimaxSpec(8, 7, -1e-3, 4))


def ones(problem, c=1.0):
    return np.full(problem.dim, c)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one verdict line per acceptance criterion; echoed in the terminal summary."""

    def report(number, title, passed, detail):
        line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
