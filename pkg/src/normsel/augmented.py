"""Buffer automata: a DFA augmented with the last ``k`` selected symbols.

State ``(q, w)`` with ``q`` a base state and ``w`` in ``A^k`` is stored at index
``q * base**k + index(w)``.  A transition into a non-final base state keeps
the buffer; a transition into a final base state shifts the read symbol in.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .automata import Dfa, strongly_connected_components
from .exceptions import ConfigurationError, InconclusiveError, InputError, StructuralError
from .validation import all_words, as_word, check_symbols, index_word, word_index, word_str

MAX_STATES = 10**6


@dataclass(frozen=True, eq=False)
class AugmentedAutomaton:
    base: Dfa
    k: int
    table: np.ndarray  # (n_states, alphabet_size) successor indices

    @property
    def alphabet_size(self) -> int:
        return self.base.alphabet_size

    @property
    def n_words(self) -> int:
        return self.alphabet_size**self.k

    @property
    def n_states(self) -> int:
        return self.table.shape[0]

    @property
    def initial(self) -> int:
        """``(q0, 0^k)``."""
        return self.base.initial * self.n_words

    def encode(self, q: int, w) -> int:
        w = as_word(w)
        if len(w) != self.k:
            raise InputError(f"buffer word must have length {self.k}")
        return q * self.n_words + word_index(w, self.alphabet_size)

    def decode(self, s: int) -> tuple[int, tuple[int, ...]]:
        q, widx = divmod(int(s), self.n_words)
        return q, index_word(widx, self.alphabet_size, self.k)

    def is_final(self, s: int) -> bool:
        return (int(s) // self.n_words) in self.base.finals

    def state_name(self, s: int) -> str:
        q, w = self.decode(s)
        return f"({self.base.names[q]},{word_str(w) if self.alphabet_size <= 10 else w})"

    @property
    def final_mask(self) -> np.ndarray:
        return np.repeat(self.base.final_mask, self.n_words)

    def step(self, s: int, a: int) -> int:
        return int(self.table[s, a])

    def trace(self, x, n: int | None = None) -> np.ndarray:
        """Augmented states after each of the first ``n`` symbols of ``x``."""
        x = check_symbols(x, self.alphabet_size, n)
        tab = self.table.tolist()
        s = self.initial
        out = []
        push = out.append
        for a in x.tolist():
            s = tab[s][a]
            push(s)
        return np.array(out, dtype=np.int64)

    def successors(self, s: int) -> list[int]:
        return sorted(set(self.table[s].tolist()))


def build_buffer_automaton(dfa: Dfa, k: int) -> AugmentedAutomaton:
    if k < 1:
        raise ConfigurationError("buffer length k must be at least 1")
    b = dfa.alphabet_size
    n_words = b**k
    if dfa.n_states * n_words > MAX_STATES:
        raise ConfigurationError(
            f"buffer automaton would have {dfa.n_states * n_words} states (cap {MAX_STATES})"
        )
    base_next = dfa.transition_array  # (Q, b)
    q_idx = np.repeat(np.arange(dfa.n_states), n_words)
    w_idx = np.tile(np.arange(n_words), dfa.n_states)
    table = np.empty((dfa.n_states * n_words, b), dtype=np.int64)
    for a in range(b):
        nq = base_next[q_idx, a]
        shifted = (w_idx * b + a) % n_words
        nw = np.where(dfa.final_mask[nq], shifted, w_idx)
        table[:, a] = nq * n_words + nw
    return AugmentedAutomaton(dfa, k, table)


@dataclass(frozen=True, eq=False)
class RecurrentPiece:
    """A recurrent SCC of a buffer automaton, as entered by a particular orbit."""

    aug: AugmentedAutomaton
    members: tuple[int, ...]
    entry: int
    entry_step: int
    finals: tuple[int, ...]
    by_word: dict[tuple[int, ...], tuple[int, ...]]
    violations: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    def final_members_with(self, w) -> tuple[int, ...]:
        w = as_word(w)
        return tuple(s for s in self.by_word.get(w, ()) if self.aug.is_final(s))

    def covered_words(self) -> list[tuple[int, ...]]:
        return [w for w in all_words(self.aug.alphabet_size, self.aug.k) if self.by_word.get(w)]

    @property
    def ok(self) -> bool:
        return not self.violations


def _recurrent_flags(aug: AugmentedAutomaton):
    comps = strongly_connected_components(aug.n_states, aug.successors)
    comp_of = np.empty(aug.n_states, dtype=np.int64)
    for i, comp in enumerate(comps):
        comp_of[comp] = i
    recurrent = np.array([bool((comp_of[aug.table[c].ravel()] == i).all()) for i, c in enumerate(comps)])
    return comp_of, comps, recurrent


def _reachable(start: int, neighbours, allowed: set[int]) -> set[int]:
    seen = {start}
    todo = deque([start])
    while todo:
        s = todo.popleft()
        for t in neighbours(s):
            if t in allowed and t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def piece_violations(aug: AugmentedAutomaton, members: set[int], entry: int) -> list[str]:
    out = []
    escapes = [s for s in members if any(int(t) not in members for t in aug.table[s])]
    if escapes:
        out.append(f"not closed: {aug.state_name(escapes[0])} has a transition leaving the piece")
    forward = _reachable(entry, aug.successors, members)
    preds: dict[int, list[int]] = {s: [] for s in members}
    for s in members:
        for t in aug.table[s].tolist():
            if t in members:
                preds[t].append(s)
    backward = _reachable(entry, lambda s: preds[s], members)
    if forward != members or backward != members:
        out.append("not strongly connected")
    if not any(aug.is_final(s) for s in members):
        out.append("no final state in the piece")
    words = {aug.decode(s)[1] for s in members}
    missing = [w for w in all_words(aug.alphabet_size, aug.k) if w not in words]
    if missing:
        shown = ", ".join(word_str(w) for w in missing[:4])
        out.append(f"buffer coverage incomplete: {len(missing)} word(s) missing, e.g. {shown}")
    return out


def recurrent_piece(aug: AugmentedAutomaton, x, probe: int = 10_000, strict: bool = True) -> RecurrentPiece:
    """Follow the orbit of ``x`` until it enters a recurrent SCC and describe that SCC.

    With ``strict`` a violated piece property raises :class:`StructuralError`.
    """
    comp_of, comps, recurrent = _recurrent_flags(aug)
    x = check_symbols(x, aug.alphabet_size, probe)
    s = aug.initial
    step = 0
    while not recurrent[comp_of[s]]:
        if step >= x.size:
            raise InconclusiveError(f"orbit did not enter a recurrent component within {x.size} steps")
        s = int(aug.table[s, x[step]])
        step += 1
    members = sorted(comps[comp_of[s]])
    member_set = set(members)
    by_word: dict[tuple[int, ...], list[int]] = {}
    for t in members:
        by_word.setdefault(aug.decode(t)[1], []).append(t)
    violations = piece_violations(aug, member_set, s)
    piece = RecurrentPiece(
        aug,
        tuple(members),
        s,
        step,
        tuple(t for t in members if aug.is_final(t)),
        {w: tuple(v) for w, v in by_word.items()},
        tuple(violations),
    )
    if strict and violations:
        raise StructuralError("recurrent piece violates: " + "; ".join(violations))
    return piece


@dataclass(frozen=True)
class MeasureReport:
    in_degrees: dict[int, int]
    in_degree_violations: tuple[int, ...]
    depth: int
    cylinder_violations: tuple[tuple[int, tuple[int, ...]], ...]
    group_hypothesis: bool

    @property
    def preserved(self) -> bool:
        return not self.in_degree_violations and not self.cylinder_violations


def cylinder_preimage_measure(piece: RecurrentPiece, w, s: int) -> Fraction:
    """Exact measure of the preimage of the cylinder ``C_w x {s}`` inside the piece.

    Every depth-``|w|+1`` cylinder ``C_u x {t}`` of the piece is pushed forward
    and kept when its image is exactly ``C_w x {s}``.
    """
    aug = piece.aug
    b = aug.alphabet_size
    w = as_word(w)
    cell = Fraction(1, b ** (len(w) + 1) * piece.size)
    total = Fraction(0)
    for t in piece.members:
        for u in all_words(b, len(w) + 1):
            if u[1:] == w and aug.step(t, u[0]) == s:
                total += cell
    return total


def check_measure_preservation(piece: RecurrentPiece, depth: int = 2) -> MeasureReport:
    """In-degree test plus an exhaustive shallow-cylinder check in exact arithmetic."""
    aug = piece.aug
    b = aug.alphabet_size
    members = set(piece.members)
    indeg = {s: 0 for s in piece.members}
    for p in piece.members:
        for a in range(b):
            t = aug.step(p, a)
            if t in members:
                indeg[t] += 1
    bad_deg = tuple(s for s, d in indeg.items() if d != b)
    bad_cyl = []
    for s in piece.members:
        for ell in range(depth + 1):
            target = Fraction(1, b**ell * piece.size)
            for w in all_words(b, ell):
                if cylinder_preimage_measure(piece, w, s) != target:
                    bad_cyl.append((s, w))
    base = aug.base
    return MeasureReport(indeg, bad_deg, depth, tuple(bad_cyl), base.is_group() and base.is_transitive())


def predicted_word_frequency(piece: RecurrentPiece, w) -> Fraction:
    """``#{final piece states with buffer w} / #{final piece states}``."""
    w = as_word(w)
    if len(w) != piece.aug.k:
        raise InputError(f"word length {len(w)} differs from buffer length {piece.aug.k}")
    if not piece.finals:
        raise StructuralError("piece has no final states")
    return Fraction(len(piece.final_members_with(w)), len(piece.finals))


def augmented_visit_frequencies(aug: AugmentedAutomaton, x, n: int | None = None) -> np.ndarray:
    orbit = aug.trace(x, n)
    if orbit.size == 0:
        raise InputError("visit frequencies need at least one symbol")
    return np.bincount(orbit, minlength=aug.n_states) / orbit.size


def selected_counts_via_buffer(aug: AugmentedAutomaton, x, n: int | None = None) -> tuple[np.ndarray, int]:
    """Counts of every ``k``-word in the selected stream, read off the buffer.

    After the j-th final visit (j >= k) the buffer holds selected symbols
    ``j-k+1..j``; returns the per-word counts and the number of such windows.
    """
    orbit = aug.trace(x, n)
    finals = orbit[aug.final_mask[orbit]] if orbit.size else orbit
    windows = finals[aug.k - 1 :]
    counts = np.bincount(windows % aug.n_words, minlength=aug.n_words).astype(np.int64)
    return counts, int(windows.size)


def selected_frequency_via_buffer(aug: AugmentedAutomaton, x, n: int | None, w) -> float:
    w = as_word(w)
    if len(w) != aug.k:
        raise InputError(f"word length {len(w)} differs from buffer length {aug.k}")
    counts, windows = selected_counts_via_buffer(aug, x, n)
    return counts[word_index(w, aug.alphabet_size)] / windows if windows else 0.0


class BufferAutomatonAnalyzer(BaseEstimator):
    """Fit the buffer automaton's recurrent piece on an input stream.

    Fitted attributes: ``augmented_``, ``piece_``, ``measure_``.
    """

    def __init__(self, automaton: Dfa | None = None, k: int = 1, probe: int = 10_000, depth: int = 2, strict: bool = False):
        self.automaton = automaton
        self.k = k
        self.probe = probe
        self.depth = depth
        self.strict = strict

    def fit(self, X, y=None):
        if not isinstance(self.automaton, Dfa):
            raise InputError("BufferAutomatonAnalyzer needs a Dfa automaton")
        self.augmented_ = build_buffer_automaton(self.automaton, self.k)
        self.piece_ = recurrent_piece(self.augmented_, X, self.probe, strict=self.strict)
        self.measure_ = check_measure_preservation(self.piece_, self.depth)
        return self

    def predicted_frequencies(self) -> dict[tuple[int, ...], Fraction]:
        check_is_fitted(self, "piece_")
        if not self.piece_.finals:
            return {}
        return {
            w: predicted_word_frequency(self.piece_, w)
            for w in all_words(self.augmented_.alphabet_size, self.k)
        }

    def transform(self, X) -> np.ndarray:
        """Per-word selected counts read from the buffer along the orbit of ``X``."""
        check_is_fitted(self, "augmented_")
        return selected_counts_via_buffer(self.augmented_, X)[0]
