import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import LINES as ACCEPTANCE_LINES  # noqa: E402
from ltl_pomcp.benchmarks import fixture_automaton, motivating, toy  # noqa: E402
from ltl_pomcp.product import build_product  # noqa: E402
from ltl_pomcp.support import certify  # noqa: E402

def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def toy_product():
    return build_product(toy(), fixture_automaton("toy"))


@pytest.fixture(scope="session")
def toy_certified(toy_product):
    cs, _ = certify(toy_product)
    return cs


@pytest.fixture(scope="session")
def motivating_product():
    return build_product(motivating(), fixture_automaton("motivating"))


@pytest.fixture(scope="session")
def motivating_certified(motivating_product):
    cs, _ = certify(motivating_product)
    return cs
