"""Prefix selection of symbol streams by the language of a DFA.

Non-oblivious selection keeps ``x[i]`` when the prefix ``x[1..i]`` *including*
``x[i]`` is accepted; oblivious selection looks at ``x[1..i-1]`` only.  With
``complement=True`` the test is inverted (selection by ``A* \\ L``).
"""
from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .automata import Dfa
from .exceptions import InputError
from .validation import check_symbols

OBLIVIOUS = "oblivious"
NON_OBLIVIOUS = "nonoblivious"
MODES = (OBLIVIOUS, NON_OBLIVIOUS)


def check_mode(mode: str) -> str:
    normalized = mode.replace("-", "").replace("_", "").lower()
    if normalized not in MODES:
        raise InputError(f"selection mode must be one of {MODES}, got {mode!r}")
    return normalized


def select(dfa: Dfa, x: Iterable[int], mode: str = NON_OBLIVIOUS, complement: bool = False) -> Iterator[int]:
    """Lazily yield the selected symbols of ``x``; works on unbounded iterables."""
    mode = check_mode(mode)
    tab = dfa.table
    finals = dfa.finals
    base = dfa.alphabet_size
    q = dfa.initial
    if isinstance(x, str):
        x = (ord(c) - 48 for c in x)
    for i, a in enumerate(x):
        a = int(a)
        if not 0 <= a < base:
            raise InputError(f"symbol {a} at position {i + 1} is outside alphabet of size {base}")
        if mode == OBLIVIOUS:
            keep = q in finals
            q = tab[q][a]
        else:
            q = tab[q][a]
            keep = q in finals
        if keep != complement:
            yield a


def selection_mask(dfa: Dfa, x, mode: str = NON_OBLIVIOUS, complement: bool = False) -> np.ndarray:
    """Boolean mask over a finite ``x`` marking the selected positions."""
    mode = check_mode(mode)
    x = check_symbols(x, dfa.alphabet_size)
    after = dfa.trace(x)
    if mode == OBLIVIOUS:
        before = np.empty_like(after)
        before[:1] = dfa.initial
        before[1:] = after[:-1]
        mask = dfa.final_mask[before] if x.size else np.zeros(0, dtype=bool)
    else:
        mask = dfa.final_mask[after] if x.size else np.zeros(0, dtype=bool)
    return ~mask if complement else mask


def select_array(dfa: Dfa, x, mode: str = NON_OBLIVIOUS, complement: bool = False) -> np.ndarray:
    x = check_symbols(x, dfa.alphabet_size)
    return x[selection_mask(dfa, x, mode, complement)]


def build_la_automaton(dfa: Dfa) -> Dfa:
    """DFA for ``L·A``: words ``wa`` with ``w`` accepted by ``dfa`` and ``a`` any symbol.

    Product state ``(q, f)`` is stored at index ``2 q + f`` where ``f`` records
    whether the state before the last symbol was final.
    """
    table = []
    for q in range(dfa.n_states):
        for flag in (0, 1):
            prev_final = int(q in dfa.finals)
            table.append([2 * t + prev_final for t in dfa.table[q]])
    finals = frozenset(2 * q + 1 for q in range(dfa.n_states))
    names = tuple(f"{name}/{flag}" for name in dfa.names for flag in (0, 1))
    return Dfa(dfa.alphabet_size, table, 2 * dfa.initial, finals, names)


class PrefixSelector(TransformerMixin, BaseEstimator):
    """Transformer wrapping :func:`select_array` so selection composes in pipelines.

    Parameters
    ----------
    automaton : Dfa
        Automaton whose language drives the selection.
    mode : {"nonoblivious", "oblivious"}
    complement : bool
        Select by the complement language instead.
    """

    def __init__(self, automaton: Dfa | None = None, mode: str = NON_OBLIVIOUS, complement: bool = False):
        self.automaton = automaton
        self.mode = mode
        self.complement = complement

    def fit(self, X=None, y=None):
        if not isinstance(self.automaton, Dfa):
            raise InputError("PrefixSelector needs a Dfa automaton")
        self.mode_ = check_mode(self.mode)
        self.alphabet_size_ = self.automaton.alphabet_size
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "mode_")
        return select_array(self.automaton, X, self.mode_, self.complement)

    def mask(self, X) -> np.ndarray:
        check_is_fitted(self, "mode_")
        return selection_mask(self.automaton, X, self.mode_, self.complement)
