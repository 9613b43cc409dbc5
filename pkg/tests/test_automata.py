import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsel.automata import Dfa, load_automaton, strongly_connected_components
from normsel.exceptions import InputError, StructuralError
from normsel.random_automata import dfa_family, group_automaton_family

from conftest import DATA, PACKAGE_DATA

Q0, Q1, Q2 = 0, 1, 2


@st.composite
def dfas(draw, max_states=5, base=2):
    n = draw(st.integers(1, max_states))
    table = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=base, max_size=base), min_size=n, max_size=n))
    finals = draw(st.frozensets(st.integers(0, n - 1)))
    return Dfa(base, table, 0, finals)


@st.composite
def group_dfas(draw, max_states=4, base=2):
    n = draw(st.integers(1, max_states))
    perms = [draw(st.permutations(range(n))) for _ in range(base)]
    finals = draw(st.frozensets(st.integers(0, n - 1)))
    return Dfa(base, [[perms[a][q] for a in range(base)] for q in range(n)], 0, finals)


def test_step_examples(group3):
    assert group3.step(Q0, 0) == Q1
    assert group3.step(Q0, 1) == Q0
    assert group3.step(Q2, 0) == Q2


def test_step_rejects_bad_input(group3):
    with pytest.raises(InputError):
        group3.step(Q0, 2)
    with pytest.raises(InputError):
        group3.step(5, 0)


def test_run_examples(group3):
    assert group3.run("") == Q0
    assert group3.run("0") == Q1
    # q0 -0-> q1 -1-> q2 -1-> q1
    assert group3.run("011") == Q1


def test_accepts(group3):
    assert group3.accepts("0")
    assert not group3.accepts("01")
    assert not group3.accepts("")


def test_is_group(group3, ends_with_one, one_state):
    assert group3.is_group()
    assert not ends_with_one.is_group()
    assert one_state.is_group()
    assert Dfa(3, ((0, 0, 0),)).is_group()


def test_inverse_step(group3, one_state, ends_with_one):
    assert group3.inverse_step(Q1, 0) == Q0
    assert group3.inverse_step(Q1, 1) == Q2
    assert one_state.inverse_step(0, 1) == 0
    with pytest.raises(StructuralError):
        ends_with_one.inverse_step(1, 1)


def test_is_transitive(group3, one_state):
    assert group3.is_transitive()
    assert one_state.is_transitive()
    sink = Dfa(2, ((0, 1), (1, 1)), 0, frozenset({1}))
    assert not sink.is_transitive()


def test_scc_analysis(group3, ends_with_one):
    rep = group3.scc_analysis()
    assert rep.components == ((0, 1, 2),)
    assert rep.recurrent == (0,) and rep.group_flags == (True,)

    rep = ends_with_one.scc_analysis()
    assert rep.components == ((0, 1),)
    assert rep.recurrent == (0,) and rep.group_flags == (False,)


def test_scc_transient_start():
    # start state 0 feeds a disjoint copy of a 2-cycle group component
    d = Dfa(2, ((1, 2), (2, 1), (1, 2)), 0, frozenset({1}))
    rep = d.scc_analysis()
    start = rep.component_of(0)
    assert start not in rep.recurrent
    assert rep.recurrent_components == [(1, 2)]
    assert rep.group_flags == (True,)


def test_tarjan_long_chain_is_iterative():
    n = 5000
    comps = strongly_connected_components(n, lambda v: [v + 1] if v + 1 < n else [0])
    assert len(comps) == 1 and len(comps[0]) == n


def closure(d):
    reach = [{q} for q in range(d.n_states)]
    changed = True
    while changed:
        changed = False
        for q in range(d.n_states):
            more = set().union(*(reach[t] for s in reach[q] for t in d.successors(s)))
            if not more <= reach[q]:
                reach[q] |= more
                changed = True
    return reach


@settings(max_examples=200)
@given(dfas(max_states=7))
def test_scc_matches_mutual_reachability(d):
    reach = closure(d)
    rep = d.scc_analysis()
    for comp in rep.components:
        for p in comp:
            assert {q for q in range(d.n_states) if q in reach[p] and p in reach[q]} == set(comp)
    closed = {i for i, comp in enumerate(rep.components) if all(reach[p] <= set(comp) for p in comp)}
    assert set(rep.recurrent) == closed


@given(dfas(), st.lists(st.integers(0, 1), max_size=20), st.lists(st.integers(0, 1), max_size=20))
def test_run_is_monoid_action(d, u, v):
    assert d.run(u + v) == d.run(v, start=d.run(u))


@given(group_dfas())
def test_inverse_step_inverts_step(d):
    for q in range(d.n_states):
        for a in range(d.alphabet_size):
            assert d.inverse_step(d.step(q, a), a) == q
            assert d.step(d.inverse_step(q, a), a) == q


@given(dfas())
def test_recurrent_components_are_closed(d):
    rep = d.scc_analysis()
    assert sorted(q for c in rep.components for q in c) == list(range(d.n_states))
    for i, comp in enumerate(rep.components):
        closed = all(t in comp for q in comp for t in d.table[q])
        assert closed == (i in rep.recurrent)


@given(group_dfas())
def test_group_implies_recurrent_group_flags(d):
    assert all(d.scc_analysis().group_flags)


def test_random_families_are_seeded():
    assert [d.table for d in group_automaton_family(5, seed=3)] == [d.table for d in group_automaton_family(5, seed=3)]
    assert all(d.is_group() and d.finals for d in group_automaton_family(10, seed=4))
    assert all(d.is_transitive() for d in group_automaton_family(10, seed=4, transitive=True))
    assert all(1 <= d.n_states <= 5 for d in dfa_family(30, 5, seed=1))


def test_json_round_trip(group3, tmp_path):
    path = tmp_path / "a.json"
    path.write_text(group3.dumps())
    loaded = load_automaton(path)
    assert loaded == group3 and loaded.names == group3.names
    assert load_automaton(PACKAGE_DATA / "group3.json") == group3


def test_loader_rejects_partial():
    with pytest.raises(InputError, match="'b'"):
        load_automaton(DATA / "partial.json")


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"initial": ["q0", "q1"]}, "exactly one"),
        ({"initial": "qx"}, "unknown state 'qx'"),
        ({"finals": ["q9"]}, "unknown state 'q9'"),
        ({"alphabet_size": 1}, "alphabet_size"),
        ({"transitions": {"q0": ["q1"], "q1": ["q0", "q2"], "q2": ["q2", "q1"]}}, "'q0' needs 2"),
        ({"transitions": {"q0": ["q1", "q7"], "q1": ["q0", "q2"], "q2": ["q2", "q1"]}}, "symbol 1 targets unknown"),
    ],
)
def test_loader_errors_name_the_culprit(group3, tmp_path, patch, message):
    data = group3.to_dict()
    data.update(patch)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InputError, match=message):
        load_automaton(path)


def test_loader_reports_json_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "alphabet_size": 2,\n  oops\n}')
    with pytest.raises(InputError, match="line 3"):
        load_automaton(path)
