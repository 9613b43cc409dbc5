"""Seeded random automaton families for property tests and verification suites."""
from __future__ import annotations

import os

import numpy as np

from .automata import Dfa

DEFAULT_SEED = 20240917
SEED_ENV = "NORMSEL_SEED"


def default_seed() -> int:
    """The package default seed, unless overridden through ``$NORMSEL_SEED``."""
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else DEFAULT_SEED


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(default_seed() if seed is None else seed)


def _random_finals(rng: np.random.Generator, n: int, nonempty: bool) -> frozenset[int]:
    while True:
        finals = frozenset(int(q) for q in np.flatnonzero(rng.random(n) < 0.5))
        if finals or not nonempty:
            return finals


def random_dfa(seed=None, n_states: int = 3, base: int = 2) -> Dfa:
    rng = _rng(seed)
    table = rng.integers(0, n_states, size=(n_states, base))
    return Dfa(base, table.tolist(), 0, _random_finals(rng, n_states, nonempty=False))


def random_group_automaton(seed=None, n_states: int = 3, base: int = 2, nonempty_finals: bool = True) -> Dfa:
    rng = _rng(seed)
    perms = [rng.permutation(n_states) for _ in range(base)]
    table = [[int(perms[a][q]) for a in range(base)] for q in range(n_states)]
    return Dfa(base, table, 0, _random_finals(rng, n_states, nonempty=nonempty_finals))


def random_transitive_group_automaton(seed=None, n_states: int = 3, base: int = 2) -> Dfa:
    rng = _rng(seed)
    while True:
        dfa = random_group_automaton(rng, n_states, base)
        if dfa.is_transitive():
            return dfa


def dfa_family(count: int, max_states: int = 5, seed=None, base: int = 2) -> list[Dfa]:
    rng = _rng(seed)
    return [random_dfa(rng, int(rng.integers(1, max_states + 1)), base) for _ in range(count)]


def group_automaton_family(
    count: int, max_states: int = 4, seed=None, base: int = 2, transitive: bool = False
) -> list[Dfa]:
    """``count`` random group automata with 1..max_states states and non-empty finals."""
    rng = _rng(seed)
    make = random_transitive_group_automaton if transitive else random_group_automaton
    return [make(rng, int(rng.integers(1, max_states + 1)), base) for _ in range(count)]
