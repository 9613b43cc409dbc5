"""Complete deterministic finite automata over ``{0, ..., alphabet_size - 1}``.

States are dense 0-based indices; ``names`` is metadata used for file I/O and
reports.  Automata are immutable and must be complete: every (state, symbol)
pair has a successor.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import InputError, StructuralError
from .validation import as_word, check_base, check_symbols

__all__ = [
    "Dfa",
    "SccReport",
    "strongly_connected_components",
    "example_group_automaton",
    "ends_with_one_automaton",
    "load_automaton",
]


@dataclass(frozen=True)
class Dfa:
    alphabet_size: int
    table: tuple[tuple[int, ...], ...]
    initial: int = 0
    finals: frozenset[int] = frozenset()
    names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        check_base(self.alphabet_size)
        table = tuple(tuple(int(t) for t in row) for row in self.table)
        n = len(table)
        if n == 0:
            raise InputError("automaton needs at least one state")
        for q, row in enumerate(table):
            if len(row) != self.alphabet_size:
                raise InputError(
                    f"state {self._label(q)} has {len(row)} transitions, expected {self.alphabet_size}"
                )
            for a, t in enumerate(row):
                if not 0 <= t < n:
                    raise InputError(f"transition ({self._label(q)}, {a}) targets unknown state {t}")
        if not 0 <= self.initial < n:
            raise InputError(f"initial state {self.initial} out of range")
        finals = frozenset(int(f) for f in self.finals)
        if any(not 0 <= f < n for f in finals):
            raise InputError(f"final states {sorted(finals)} not all in range 0..{n - 1}")
        names = tuple(self.names) or tuple(f"q{i}" for i in range(n))
        if len(names) != n or len(set(names)) != n:
            raise InputError("state names must be unique, one per state")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "finals", finals)
        object.__setattr__(self, "names", names)

    def _label(self, q: int) -> str:
        return self.names[q] if q < len(self.names) else str(q)

    @property
    def n_states(self) -> int:
        return len(self.table)

    @cached_property
    def final_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_states, dtype=bool)
        mask[list(self.finals)] = True
        return mask

    @cached_property
    def transition_array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64)

    # -- running -----------------------------------------------------------

    def step(self, q: int, a: int) -> int:
        if not 0 <= q < self.n_states:
            raise InputError(f"state {q} out of range")
        if not 0 <= a < self.alphabet_size:
            raise InputError(f"symbol {a} outside alphabet of size {self.alphabet_size}")
        return self.table[q][a]

    def run(self, w, start: int | None = None) -> int:
        """State reached after reading ``w`` from ``start`` (default: initial)."""
        q = self.initial if start is None else start
        for a in as_word(w):
            q = self.step(q, a)
        return q

    def accepts(self, w) -> bool:
        return self.run(w) in self.finals

    def trace(self, x, start: int | None = None) -> np.ndarray:
        """States after each symbol of ``x``: entry ``i`` is the state after ``x[: i + 1]``."""
        x = check_symbols(x, self.alphabet_size)
        tab = self.table
        q = self.initial if start is None else start
        out = []
        push = out.append
        for a in x.tolist():
            q = tab[q][a]
            push(q)
        return np.array(out, dtype=np.int64)

    # -- structure ---------------------------------------------------------

    def is_group(self) -> bool:
        """Every symbol permutes the states."""
        return all(
            len({row[a] for row in self.table}) == self.n_states for a in range(self.alphabet_size)
        )

    @cached_property
    def _inverse_table(self) -> tuple[tuple[int, ...], ...] | None:
        if not self.is_group():
            return None
        inv = [[0] * self.alphabet_size for _ in range(self.n_states)]
        for p, row in enumerate(self.table):
            for a, q in enumerate(row):
                inv[q][a] = p
        return tuple(tuple(r) for r in inv)

    def inverse_step(self, q: int, a: int) -> int:
        """The unique predecessor ``p`` with ``step(p, a) == q``; group automata only."""
        inv = self._inverse_table
        if inv is None:
            raise StructuralError("inverse_step requires a group automaton")
        if not 0 <= q < self.n_states or not 0 <= a < self.alphabet_size:
            raise InputError(f"state {q} or symbol {a} out of range")
        return inv[q][a]

    def successors(self, q: int) -> list[int]:
        return sorted(set(self.table[q]))

    def is_transitive(self) -> bool:
        return len(strongly_connected_components(self.n_states, self.successors)) == 1

    def scc_analysis(self) -> "SccReport":
        comps = strongly_connected_components(self.n_states, self.successors)
        comps = sorted((tuple(sorted(c)) for c in comps), key=lambda c: c[0])
        recurrent = []
        group_flags = []
        for i, comp in enumerate(comps):
            members = set(comp)
            if all(t in members for q in comp for t in self.table[q]):
                recurrent.append(i)
                group_flags.append(
                    all(
                        len({self.table[q][a] for q in comp}) == len(comp)
                        for a in range(self.alphabet_size)
                    )
                )
        return SccReport(tuple(comps), tuple(recurrent), tuple(group_flags))

    def restrict(self, states: Sequence[int], initial: int) -> "Dfa":
        """Sub-automaton on a closed set of states, re-indexed in the given order."""
        index = {q: i for i, q in enumerate(states)}
        try:
            table = [[index[t] for t in self.table[q]] for q in states]
        except KeyError as exc:
            raise StructuralError(f"state set is not closed: {self.names[exc.args[0]]} escapes") from None
        return Dfa(
            self.alphabet_size,
            table,
            index[initial],
            frozenset(index[q] for q in states if q in self.finals),
            tuple(self.names[q] for q in states),
        )

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "alphabet_size": self.alphabet_size,
            "states": list(self.names),
            "initial": self.names[self.initial],
            "finals": [self.names[q] for q in sorted(self.finals)],
            "transitions": {
                self.names[q]: [self.names[t] for t in row] for q, row in enumerate(self.table)
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Dfa":
        if not isinstance(data, dict):
            raise InputError("automaton description must be a JSON object")
        for key in ("alphabet_size", "states", "initial", "finals", "transitions"):
            if key not in data:
                raise InputError(f"automaton description is missing field {key!r}")
        base = data["alphabet_size"]
        if not isinstance(base, int) or isinstance(base, bool) or base < 2:
            raise InputError(f"field 'alphabet_size' must be an integer >= 2, got {base!r}")
        names = data["states"]
        if not isinstance(names, list) or not names or not all(isinstance(s, str) for s in names):
            raise InputError("field 'states' must be a non-empty list of strings")
        if len(set(names)) != len(names):
            raise InputError("field 'states' contains duplicate names")
        index = {s: i for i, s in enumerate(names)}
        initial = data["initial"]
        if not isinstance(initial, str):
            raise InputError("field 'initial' must name exactly one state")
        if initial not in index:
            raise InputError(f"field 'initial': unknown state {initial!r}")
        finals = data["finals"]
        if not isinstance(finals, list):
            raise InputError("field 'finals' must be a list of state names")
        for f in finals:
            if f not in index:
                raise InputError(f"field 'finals': unknown state {f!r}")
        trans = data["transitions"]
        if not isinstance(trans, dict):
            raise InputError("field 'transitions' must map state names to successor lists")
        for s in trans:
            if s not in index:
                raise InputError(f"field 'transitions': unknown state {s!r}")
        table = []
        for s in names:
            row = trans.get(s)
            if row is None:
                raise InputError(f"field 'transitions': state {s!r} has no transitions (automaton is partial)")
            if not isinstance(row, list) or len(row) != base:
                got = len(row) if isinstance(row, list) else type(row).__name__
                raise InputError(
                    f"field 'transitions': state {s!r} needs {base} successors, got {got}"
                )
            out = []
            for a, t in enumerate(row):
                if t is None:
                    raise InputError(f"field 'transitions': missing transition for state {s!r}, symbol {a}")
                if t not in index:
                    raise InputError(f"field 'transitions': state {s!r}, symbol {a} targets unknown state {t!r}")
                out.append(index[t])
            table.append(out)
        return cls(base, table, index[initial], frozenset(index[f] for f in finals), tuple(names))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def load_automaton(path) -> Dfa:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return Dfa.from_dict(data)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class SccReport:
    """SCC partition of an automaton's transition graph.

    ``recurrent`` holds indices into ``components``; ``group_flags[i]`` tells
    whether recurrent component ``recurrent[i]`` is a group automaton on its own.
    """

    components: tuple[tuple[int, ...], ...]
    recurrent: tuple[int, ...]
    group_flags: tuple[bool, ...]

    def component_of(self, q: int) -> int:
        for i, comp in enumerate(self.components):
            if q in comp:
                return i
        raise InputError(f"state {q} not in any component")

    @property
    def recurrent_components(self) -> list[tuple[int, ...]]:
        return [self.components[i] for i in self.recurrent]


def strongly_connected_components(n: int, successors) -> list[list[int]]:
    """Tarjan's algorithm, iterative so deep graphs do not hit the recursion limit.

    ``successors(v)`` returns the out-neighbours of vertex ``v`` in ``range(n)``.
    Components come out in reverse topological order.
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def example_group_automaton() -> Dfa:
    """Three-state group automaton accepting words that end in state ``q1``.

    Symbol 0 swaps q0 and q1 and fixes q2; symbol 1 swaps q1 and q2 and fixes q0.
    """
    return Dfa(2, ((1, 0), (0, 2), (2, 1)), 0, frozenset({1}), ("q0", "q1", "q2"))


def ends_with_one_automaton() -> Dfa:
    """Two-state automaton for the words ending in ``1`` (not a group automaton)."""
    return Dfa(2, ((0, 1), (0, 1)), 0, frozenset({1}), ("s0", "s1"))
