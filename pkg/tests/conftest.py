import numpy as np
import pytest

from eprlab.grid import make_grid
from eprlab.states import EPRParams, epr_pair

# dx = 0.05: every slit edge used in the suite (multiples of 0.1) sits on a cell boundary
CANONICAL = (2048, -51.2, 51.2)


@pytest.fixture(scope="session")
def grid():
    return make_grid(*CANONICAL)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(1024, -40.0, 40.0)


@pytest.fixture(scope="session")
def epr_narrow(grid):
    return epr_pair((grid, grid), EPRParams(0.1, 10.0))


@pytest.fixture(scope="session")
def epr_wide(grid):
    return epr_pair((grid, grid), EPRParams(0.5, 10.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def log(line: str):
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
