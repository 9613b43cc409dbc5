from pathlib import Path

import pytest

from normsel.automata import Dfa, ends_with_one_automaton, example_group_automaton

DATA = Path(__file__).parent / "data"
PACKAGE_DATA = Path(__file__).parent.parent / "src" / "normsel" / "data"


@pytest.fixture
def group3():
    return example_group_automaton()


@pytest.fixture
def ends_with_one():
    return ends_with_one_automaton()


@pytest.fixture
def one_state():
    return Dfa(2, ((0, 0),), 0, frozenset({0}), ("s",))


@pytest.fixture
def lone_one():
    """Non-group automaton whose buffer piece has in-degrees 3 and 1."""
    return Dfa(2, ((0, 1), (0, 0)), 0, frozenset({1}), ("s0", "s1"))
