from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsel.augmented import (
    BufferAutomatonAnalyzer,
    augmented_visit_frequencies,
    build_buffer_automaton,
    check_measure_preservation,
    cylinder_preimage_measure,
    predicted_word_frequency,
    recurrent_piece,
    selected_counts_via_buffer,
    selected_frequency_via_buffer,
)
from normsel.automata import Dfa
from normsel.exceptions import ConfigurationError, InconclusiveError, InputError, StructuralError
from normsel.random_automata import dfa_family, group_automaton_family, random_dfa
from normsel.selection import select_array
from normsel.sequences import champernowne, periodic
from normsel.stats import freq_table
from normsel.validation import all_words

CHAMP = champernowne(2, 10_000)


def naive_buffer_table(dfa, k):
    """Map ((q, w), a) -> (q', w') built from tuples, shifting the buffer on final successors."""
    out = {}
    for q in range(dfa.n_states):
        for w in all_words(dfa.alphabet_size, k):
            for a in range(dfa.alphabet_size):
                t = dfa.step(q, a)
                out[(q, w), a] = (t, w[1:] + (a,)) if t in dfa.finals else (t, w)
    return out


def test_fig1_sizes_and_transitions(group3):
    a1 = build_buffer_automaton(group3, 1)
    assert a1.n_states == 6
    assert a1.decode(a1.step(a1.encode(0, "0"), 0)) == (1, (0,))
    assert build_buffer_automaton(group3, 2).n_states == 12
    a2 = build_buffer_automaton(group3, 2)
    for w in all_words(2, 2):
        assert a2.decode(a2.step(a2.encode(1, w), 1)) == (2, w)
    assert a2.initial == a2.encode(0, "00")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.sampled_from([2, 3]))
def test_buffer_table_matches_naive(seed, k, base):
    dfa = random_dfa(seed, int(np.random.default_rng(seed).integers(1, 5)), base)
    aug = build_buffer_automaton(dfa, k)
    assert aug.n_states == dfa.n_states * base**k
    assert aug.table.shape == (aug.n_states, base)
    assert ((aug.table >= 0) & (aug.table < aug.n_states)).all()
    for ((q, w), a), (t, w2) in naive_buffer_table(dfa, k).items():
        assert aug.decode(aug.step(aug.encode(q, w), a)) == (t, w2)


def test_budget_and_k_checks(group3):
    with pytest.raises(ConfigurationError):
        build_buffer_automaton(group3, 0)
    with pytest.raises(ConfigurationError, match="cap"):
        build_buffer_automaton(group3, 20)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_fig1_piece(group3, k):
    piece = recurrent_piece(build_buffer_automaton(group3, k), CHAMP)
    assert piece.ok and piece.finals
    assert len(piece.covered_words()) == 2**k
    report = check_measure_preservation(piece, depth=2)
    assert report.preserved and report.group_hypothesis
    assert set(report.in_degrees.values()) == {2}
    for w in all_words(2, k):
        assert predicted_word_frequency(piece, w) == Fraction(1, 2**k)


def test_one_state_piece(one_state):
    aug = build_buffer_automaton(one_state, 1)
    piece = recurrent_piece(aug, CHAMP)
    assert set(piece.members) == {aug.encode(0, "0"), aug.encode(0, "1")}
    assert check_measure_preservation(piece).preserved


def test_ends_with_one_piece(ends_with_one):
    aug = build_buffer_automaton(ends_with_one, 1)
    with pytest.raises(StructuralError, match="coverage"):
        recurrent_piece(aug, CHAMP)
    piece = recurrent_piece(aug, CHAMP, strict=False)
    assert piece.covered_words() == [(1,)]
    assert predicted_word_frequency(piece, "1") == 1
    assert predicted_word_frequency(piece, "0") == 0
    report = check_measure_preservation(piece)
    # the piece itself is balanced; the group hypothesis is what fails
    assert set(report.in_degrees.values()) == {2}
    assert not report.group_hypothesis


def test_measure_violation_detected(lone_one):
    aug = build_buffer_automaton(lone_one, 1)
    piece = recurrent_piece(aug, CHAMP, strict=False)
    report = check_measure_preservation(piece)
    assert not report.preserved and report.in_degree_violations and report.cylinder_violations


def test_cylinder_measure_is_indegree_formula():
    """Preimage measure of C_w x {s} equals indeg(s) / (b^(|w|+1) #Q')."""
    for dfa in dfa_family(20, 4, 9):
        aug = build_buffer_automaton(dfa, 1)
        try:
            piece = recurrent_piece(aug, CHAMP, strict=False)
        except InconclusiveError:
            continue
        report = check_measure_preservation(piece, depth=1)
        for s in piece.members:
            for w in all_words(2, 1):
                assert cylinder_preimage_measure(piece, w, s) == Fraction(report.in_degrees[s], 4 * piece.size)


def test_transitive_group_family_structure():
    for dfa in group_automaton_family(15, 4, 21, transitive=True):
        for k in (1, 2, 3):
            piece = recurrent_piece(build_buffer_automaton(dfa, k), CHAMP)
            assert piece.ok
            assert check_measure_preservation(piece, depth=2 if k < 3 else 1).preserved
            bound = Fraction(len(dfa.finals), 2**k)
            for w in all_words(2, k):
                p = predicted_word_frequency(piece, w)
                assert p == Fraction(1, 2**k) and p <= bound


def test_inconclusive_probe(group3):
    trap = Dfa(2, ((1, 1), (2, 2), (2, 2)), 0, {2})
    with pytest.raises(InconclusiveError):
        recurrent_piece(build_buffer_automaton(trap, 1), "0", probe=1)
    piece = recurrent_piece(build_buffer_automaton(trap, 1), "000", probe=3)
    assert piece.entry_step == 2


def test_predicted_frequency_word_length(group3):
    piece = recurrent_piece(build_buffer_automaton(group3, 2), CHAMP)
    with pytest.raises(InputError):
        predicted_word_frequency(piece, "0")


def test_visit_frequencies_on_piece(group3):
    aug = build_buffer_automaton(group3, 1)
    x = champernowne(2, 2**18)
    f = augmented_visit_frequencies(aug, x)
    piece = recurrent_piece(aug, x)
    assert f.sum() == pytest.approx(1.0)
    off = [s for s in range(aug.n_states) if s not in piece.members]
    assert all(f[s] <= piece.entry_step / x.size for s in off)
    assert np.abs(f[list(piece.members)] - 1 / piece.size).max() < 0.03


def test_visit_frequencies_periodic_zero(group3):
    aug = build_buffer_automaton(group3, 1)
    f = augmented_visit_frequencies(aug, periodic("0", 1000))
    support = {aug.decode(s) for s in np.flatnonzero(f)}
    assert support == {(1, (0,)), (0, (0,))}


@pytest.mark.parametrize("seed", range(25))
def test_buffer_counts_match_direct_selection(seed):
    rng = np.random.default_rng(seed)
    dfa = group_automaton_family(1, 4, rng)[0]
    k = int(rng.integers(1, 4))
    x = rng.integers(0, 2, 10_000)
    counts, windows = selected_counts_via_buffer(build_buffer_automaton(dfa, k), x)
    y = select_array(dfa, x)
    if y.size < k:
        assert windows == 0
        return
    assert windows == y.size - k + 1
    assert counts.tolist() == freq_table(y, None, k).sliding[k - 1].tolist()


def test_absent_word_has_zero_frequency(ends_with_one):
    aug = build_buffer_automaton(ends_with_one, 2)
    assert selected_frequency_via_buffer(aug, CHAMP, None, "00") == 0.0
    assert selected_frequency_via_buffer(aug, CHAMP, None, "11") == 1.0


def test_analyzer_estimator(group3):
    est = BufferAutomatonAnalyzer(group3, k=2).fit(CHAMP)
    assert est.measure_.preserved
    assert set(est.predicted_frequencies().values()) == {Fraction(1, 4)}
    assert est.transform(CHAMP).sum() == select_array(group3, CHAMP).size - 1
