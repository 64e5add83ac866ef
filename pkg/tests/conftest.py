import pytest

from ccspdl.syntax import parse_environment

VENDING = """
# coins, buttons, collect
def A = 1e.little.~collect.A + 1e.1e.big.~collect.A + 2e.big.~collect.A + tau
def V = 1e.little.~collect.A + 1e.1e.big.~collect.A + 2e.big.~collect.A
def C = ~1e.~little.collect + ~1e.~1e.~big.collect + ~2e.~big.collect
"""


@pytest.fixture
def vending():
    return parse_environment(VENDING)
