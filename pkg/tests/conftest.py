import numpy as np
import pytest

from tomokit import FockSuperposition, TomographyFrame, make_state

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ent():
    return make_state("ent")


@pytest.fixture(scope="session")
def sep():
    return make_state("sep")


@pytest.fixture(scope="session")
def w_state():
    return make_state("W")


@pytest.fixture(scope="session")
def vac():
    return FockSuperposition.basis((0,))


@pytest.fixture(scope="session")
def one():
    return FockSuperposition.basis((1,))


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def diag_frame():
    return TomographyFrame((1.0, 1.0), (0.0, 0.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
