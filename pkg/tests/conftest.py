import pytest

from branched_splines.branched_basis import enumerate_components
from branched_splines.cover import example_double_cover, example_triple_cover

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def triple():
    return example_triple_cover()


@pytest.fixture(scope="session")
def double():
    return example_double_cover()


@pytest.fixture(scope="session")
def triple_bases(triple):
    return {d: enumerate_components(triple, d) for d in (1, 2)}


@pytest.fixture(scope="session")
def double_bases(double):
    return {d: enumerate_components(double, d) for d in (1, 2)}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
