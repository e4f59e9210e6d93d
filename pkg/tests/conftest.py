import pytest

from idinfer.generate import suite

SUITE_SEED = 2024
SUITE_SIZE = 200


@pytest.fixture(scope="session")
def diagrams():
    return list(suite(SUITE_SEED, SUITE_SIZE))


@pytest.fixture(scope="session")
def small_suite(diagrams):
    return diagrams[:60]


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
