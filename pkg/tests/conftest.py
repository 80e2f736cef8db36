import random

import pytest

from gridauth.group import get_profile

ACCEPTANCE = []


@pytest.fixture(scope="session")
def p256():
    return get_profile("p256")


@pytest.fixture(scope="session")
def toy():
    return get_profile("toy23")


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
