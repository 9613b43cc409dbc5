"""Brute-force verification suites shared by the CLI and the acceptance tests.

Each suite returns a :class:`SuiteResult`.  A failure on an automaton that
does not satisfy the suite's hypothesis (group, transitive, ...) is reported
with status ``hypothesis_unmet`` rather than ``fail``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .augmented import (
    build_buffer_automaton,
    check_measure_preservation,
    predicted_word_frequency,
    recurrent_piece,
    selected_counts_via_buffer,
)
from .automata import Dfa, ends_with_one_automaton, example_group_automaton
from .exceptions import NormselError
from .pipeline import decode_stream_detailed, encode_stream, train_code
from .random_automata import default_seed, dfa_family, group_automaton_family
from .selection import build_la_automaton, select_array
from .sequences import champernowne
from .stats import freq_table
from .validation import all_words, word_str

PASS, FAIL, UNMET = "pass", "fail", "hypothesis_unmet"


@dataclass
class SuiteResult:
    name: str
    status: str
    detail: str = ""
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def as_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail, **self.data}


def _status(ok: bool, hypothesis: bool = True) -> str:
    if ok:
        return PASS
    return FAIL if hypothesis else UNMET


# -- selection examples ----------------------------------------------------------


def selection_pair_example(length: int = 64) -> SuiteResult:
    """``0 1^N`` and ``1 0 1^N`` select the same ``0 1^N`` and reject only ones."""
    dfa = example_group_automaton()
    x = np.array([0] + [1] * (length - 1))
    x2 = np.array([1, 0] + [1] * (length - 2))
    target = np.array([0] + [1] * length)
    y, y2 = select_array(dfa, x), select_array(dfa, x2)
    r, r2 = select_array(dfa, x, complement=True), select_array(dfa, x2, complement=True)
    common = min(y.size, y2.size)
    ok = (
        np.array_equal(y, target[: y.size])
        and np.array_equal(y2, target[: y2.size])
        and bool((r == 1).all() and (r2 == 1).all())
        and common > 0
    )
    return SuiteResult(
        "selection_pair",
        _status(ok),
        f"selected lengths {y.size}/{y2.size}, agree on first {common}",
        {"selected": [word_str(y), word_str(y2)], "rejected": [word_str(r), word_str(r2)]},
    )


def ends_with_one_example(n: int = 2**20) -> SuiteResult:
    y = select_array(ends_with_one_automaton(), champernowne(2, n))
    freq_one = float(y.mean()) if y.size else float("nan")
    return SuiteResult(
        "ends_with_one_selects_only_ones",
        _status(y.size > 0 and freq_one == 1.0),
        f"{y.size} symbols selected, frequency of 1 = {freq_one}",
        {"frequency_of_1": freq_one},
    )


def simulation_identity(cases: int = 1000, max_states: int = 5, max_len: int = 64, seed=None) -> SuiteResult:
    """Non-oblivious selection by ``L·A`` equals oblivious selection by ``L``."""
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    dfas = dfa_family(cases, max_states, rng)
    failures = []
    for i, dfa in enumerate(dfas):
        x = rng.integers(0, 2, int(rng.integers(0, max_len + 1)))
        lhs = select_array(build_la_automaton(dfa), x)
        rhs = select_array(dfa, x, mode="oblivious")
        if not np.array_equal(lhs, rhs):
            failures.append({"case": i, "automaton": dfa.to_dict(), "input": word_str(x)})
    ok = not failures
    return SuiteResult(
        "la_simulation_identity",
        _status(ok),
        f"{cases - len(failures)}/{cases} cases agree",
        {"counterexamples": failures[:3]} if failures else {},
    )


# -- run injectivity ----------------------------------------------------------------


def run_triples(dfa: Dfa, max_len: int):
    """Yield ``(start, u, (end, tape1, tape2))`` for every run of length <= max_len."""
    tab, finals = dfa.table, dfa.finals
    for p in range(dfa.n_states):
        level = [((), p, "", "")]
        yield p, (), (p, "", "")
        for _ in range(max_len):
            nxt = []
            for u, q, v, w in level:
                for a in range(dfa.alphabet_size):
                    t = tab[q][a]
                    s = str(a)
                    item = (u + (a,), t, v + s, w) if t in finals else (u + (a,), t, v, w + s)
                    nxt.append(item)
                    yield p, item[0], item[1:]
            level = nxt


def triple_injectivity(dfa: Dfa, max_len: int = 12) -> tuple[bool, tuple | None]:
    seen: dict = {}
    for p, u, triple in run_triples(dfa, max_len):
        other = seen.setdefault(triple, (p, u))
        if other != (p, u):
            return False, (other, (p, u), triple)
    return True, None


def run_injectivity_suite(dfas: list[Dfa], max_len: int = 12) -> SuiteResult:
    bad = []
    unmet = False
    for i, dfa in enumerate(dfas):
        ok, witness = triple_injectivity(dfa, max_len)
        if not ok:
            unmet = unmet or not dfa.is_group()
            (p, u), (p2, u2), triple = witness
            bad.append({"automaton": i, "runs": [[p, word_str(u)], [p2, word_str(u2)]], "end_state": triple[0]})
    hypothesis = all(d.is_group() for d in dfas)
    return SuiteResult(
        "run_triple_injectivity",
        _status(not bad, hypothesis),
        f"{len(dfas) - len(bad)}/{len(dfas)} automata injective up to length {max_len}",
        {"counterexamples": bad[:3]} if bad else {},
    )


# -- round trip ------------------------------------------------------------------------


def round_trip_suite(dfa: Dfa, k: int = 4, m: int = 64, n: int = 10_000, cases: int = 100, seed=None) -> SuiteResult:
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    failures = []
    if not dfa.is_group():
        return SuiteResult("pipeline_round_trip", UNMET, "decoding requires a group automaton")
    for i in range(cases):
        x = rng.integers(0, 2, n)
        try:
            code = train_code(dfa, x, k, n)
            machine = encode_stream(dfa, code, max(m, code.max_codeword_len), x)
            result = decode_stream_detailed(dfa, code, machine.m, machine.bits)
            expected = machine.covered_prefix_length()
            ok = result.symbols.size == expected and np.array_equal(result.symbols, x[:expected])
        except NormselError as exc:
            ok, expected = False, f"error: {exc}"
        if not ok:
            failures.append({"case": i, "expected_prefix": expected})
    return SuiteResult(
        "pipeline_round_trip",
        _status(not failures),
        f"{cases - len(failures)}/{cases} streams decode to the covered prefix",
        {"failures": failures[:3]} if failures else {},
    )


# -- buffer automaton structure ------------------------------------------------------------


def piece_suite(dfas: list[Dfa], ks, probe_input, depth: int = 2) -> SuiteResult:
    """Recurrent-piece properties, measure preservation, and uniform predicted frequencies."""
    problems = []
    checked = 0
    hypothesis = True
    for i, dfa in enumerate(dfas):
        met = dfa.is_group() and dfa.is_transitive() and bool(dfa.finals)
        hypothesis = hypothesis and met
        for k in ks:
            checked += 1
            aug = build_buffer_automaton(dfa, k)
            try:
                piece = recurrent_piece(aug, probe_input, probe=len(probe_input), strict=False)
            except NormselError as exc:
                problems.append({"automaton": i, "k": k, "issue": str(exc)})
                continue
            issues = list(piece.violations)
            measure = check_measure_preservation(piece, depth)
            if measure.in_degree_violations:
                issues.append(f"in-degree != {aug.alphabet_size} at {len(measure.in_degree_violations)} state(s)")
            if measure.cylinder_violations:
                issues.append(f"{len(measure.cylinder_violations)} depth-{depth} cylinder measure mismatches")
            if piece.finals:
                fair = Fraction(1, aug.alphabet_size**k)
                off = [word_str(w) for w in all_words(aug.alphabet_size, k) if predicted_word_frequency(piece, w) != fair]
                if off:
                    issues.append(f"predicted frequency differs from {fair} for {off[:4]}")
            if issues:
                problems.append({"automaton": i, "k": k, "issues": issues, "hypothesis_met": met})
    return SuiteResult(
        "buffer_piece_structure",
        _status(not problems, hypothesis),
        f"{checked - len(problems)}/{checked} (automaton, k) pairs satisfy every piece property",
        {"problems": problems[:5]} if problems else {},
    )


def buffer_count_agreement(cases: int = 50, n: int = 10_000, max_k: int = 3, max_states: int = 4, seed=None) -> SuiteResult:
    """Buffer-read window counts equal sliding counts on the selected stream, exactly."""
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    dfas = group_automaton_family(cases, max_states, rng)
    bad = []
    for i, dfa in enumerate(dfas):
        k = int(rng.integers(1, max_k + 1))
        x = rng.integers(0, 2, n)
        counts, windows = selected_counts_via_buffer(build_buffer_automaton(dfa, k), x)
        y = select_array(dfa, x)
        if y.size >= k:
            direct = freq_table(y, None, k).sliding[k - 1]
            ok = windows == y.size - k + 1 and np.array_equal(counts, direct)
        else:
            ok = windows == 0 and not counts.any()
        if not ok:
            bad.append(i)
    return SuiteResult(
        "buffer_count_agreement",
        _status(not bad),
        f"{cases - len(bad)}/{cases} cases agree exactly",
        {"failures": bad[:5]} if bad else {},
    )


def worked_example_suites(seed=None) -> list[SuiteResult]:
    return [selection_pair_example(), ends_with_one_example(), simulation_identity(seed=seed)]


def verify_automaton(dfa: Dfa, seed=None, family_size: int = 20, max_len: int = 12, n: int = 10_000, cases: int = 20) -> list[SuiteResult]:
    """All brute-force suites for one automaton plus a seeded group-automaton family."""
    seed = default_seed() if seed is None else seed
    family = group_automaton_family(family_size, 4, seed)
    transitive = group_automaton_family(family_size, 4, seed + 1, transitive=True)
    probe = champernowne(2, 10_000) if dfa.alphabet_size == 2 else champernowne(dfa.alphabet_size, 10_000)
    results = [run_injectivity_suite([dfa], max_len), run_injectivity_suite(family, max_len)]
    results[0].name, results[1].name = "run_triple_injectivity", "run_triple_injectivity_family"
    if dfa.alphabet_size == 2:
        results.append(round_trip_suite(dfa, n=n, cases=cases, seed=seed))
    own = piece_suite([dfa], (1, 2), probe)
    own.name = "buffer_piece_structure"
    fam = piece_suite(transitive, (1, 2), champernowne(2, 10_000))
    fam.name = "buffer_piece_structure_family"
    results += [own, fam]
    return results
