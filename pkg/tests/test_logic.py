import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssdiag.errors import AssignmentError, ParseError
from ssdiag.logic import (
    AssignmentEnv,
    Clause,
    Instantiation,
    Literal,
    Variable,
    assignment_table,
    generate_instantiations,
    index,
    index_of,
    instantiation_at,
    parse_literal,
    parse_literals,
    project,
    state_count,
)

A, B, C, D, E = (Variable(n, order=i) for i, n in enumerate("ABCDE"))
okX = Variable("okX", assumable=True, order=5)


def test_variable_rejects_bad_domains():
    with pytest.raises(ValueError):
        Variable("X", ("only",))
    with pytest.raises(ValueError):
        Variable("X", ("a", "a"))


def test_healthy_value():
    assert Variable("ok", assumable=True).healthy == 1
    assert Variable("m", ("ok", "lo", "hi"), assumable=True).healthy == 0


def test_literal_range_checked():
    with pytest.raises(ValueError):
        Literal(A, 2)


def test_literal_text_forms():
    m = Variable("M", ("ok", "lo", "hi"))
    names = {"A": A, "M": m}
    assert parse_literal("A", names) == Literal(A, 1)
    assert parse_literal("!A", names) == Literal(A, 0)
    assert parse_literal("A=0", names) == Literal(A, 0)
    assert parse_literal("M=hi", names) == Literal(m, 2)
    assert str(Literal(m, 1)) == "M=lo"
    with pytest.raises(ValueError):
        parse_literal("M", names)
    sw = Variable("SW", ("up", "down"), assumable=True)
    assert sw.healthy == 0
    assert parse_literal("SW=down", {"SW": sw}) == Literal(sw, 1)
    with pytest.raises(ValueError, match="named values"):
        parse_literal("!SW", {"SW": sw})
    with pytest.raises(ValueError):
        parse_literal("Q", names)
    with pytest.raises(ParseError, match="line 4"):
        parse_literals("A Q", names, line=4)


def test_negated_multivalued_literal_is_clause_of_other_values():
    m = Variable("M", ("ok", "lo", "hi"))
    assert Literal(m, 0).negated_clause() == Clause([Literal(m, 1), Literal(m, 2)])
    assert Literal(A, 1).negated_clause() == Clause([Literal(A, 0)])


def test_instantiation_is_canonical():
    i1 = Instantiation([Literal(D, 1), Literal(A, 0)])
    i2 = Instantiation([Literal(A, 0), Literal(D, 1)])
    assert i1 == i2 and hash(i1) == hash(i2)
    assert list(i1.variables) == [A, D]
    assert str(Instantiation()) == "true"
    with pytest.raises(ValueError):
        Instantiation([Literal(A, 0), Literal(A, 1)])


def test_project_clause_on_atoms():
    clause = Clause([Literal(A, 1), Literal(B, 0), Literal(C, 1)])
    assert project(clause, {A, B}) == Clause([Literal(A, 1), Literal(B, 0)])
    # onto the atoms of the inverter description {A, C, okX}
    assert project(clause, {A, C, okX}) == Clause([Literal(A, 1), Literal(C, 1)])


def test_project_onto_nothing():
    assert project(Instantiation([Literal(A, 1)]), set()) == Instantiation()
    assert project(Clause([Literal(A, 1)]), set()) == Clause()
    assert str(Clause()) == "false"


def test_index_binary_example():
    env = AssignmentEnv()
    env.assert_(Instantiation([Literal(A, 1), Literal(B, 0), Literal(D, 1)]))
    assert index([A, B, D], env) == 5
    assert env.value_of(B) == 0


def test_index_of_empty_set():
    assert index([], AssignmentEnv()) == 0


def test_index_multivalued_example():
    v1 = Variable("V1", ("a", "b"))
    v2 = Variable("V2", ("a", "b", "c"))
    v3 = Variable("V3", ("a", "b"))
    values = {v1: 1, v2: 2, v3: 0}
    # the first variable is the least significant digit, so list V3 first
    # to make V1 the most significant
    assert index_of([v3, v2, v1], values) == 10
    assert index_of([v1, v2, v3], values) == 1 + 2 * 2


def test_index_unassigned_is_error():
    with pytest.raises(AssignmentError):
        index([A], AssignmentEnv())


def test_generate_skips_asserted_variables():
    env = AssignmentEnv()
    env.assert_(Instantiation([Literal(D, 1)]))
    out = generate_instantiations([C, D, E], env)
    assert len(out) == 4
    assert all(set(i.variables) == {C, E} for i in out)
    assert len(set(out)) == 4


def test_generate_all_asserted_gives_empty_instantiation():
    env = AssignmentEnv()
    env.assert_(Instantiation([Literal(A, 0), Literal(B, 1)]))
    assert generate_instantiations([A, B], env) == [Instantiation()]


def test_generate_two_free_vars():
    assert len(generate_instantiations([A, B], AssignmentEnv())) == 2 * 2


def test_generate_order_follows_index():
    out = generate_instantiations([A, B, D], AssignmentEnv())
    assert [index_of([A, B, D], i.as_dict()) for i in out] == list(range(8))


def test_assert_retract_roundtrip():
    env = AssignmentEnv()
    env.assert_(Instantiation([Literal(A, 1)]))
    before = env.snapshot()
    inst = Instantiation([Literal(B, 0), Literal(C, 1)])
    env.assert_(inst)
    env.retract(inst)
    assert env.snapshot() == before


def test_conflicting_and_repeated_asserts_fail():
    env = AssignmentEnv()
    env.assert_(Instantiation([Literal(A, 1)]))
    with pytest.raises(AssignmentError):
        env.assert_(Instantiation([Literal(A, 0)]))
    with pytest.raises(AssignmentError):
        env.assert_(Instantiation([Literal(A, 1)]))
    with pytest.raises(AssignmentError):
        env.retract(Instantiation([Literal(B, 1)]))
    # a failed assert leaves nothing behind
    with pytest.raises(AssignmentError):
        env.assert_(Instantiation([Literal(B, 1), Literal(A, 0)]))
    assert not env.is_instantiated(B)


def test_assignment_table_rows_match_index():
    vs = [Variable("P", ("x", "y", "z")), A, Variable("Q", ("u", "v"))]
    table = assignment_table(vs)
    for r, row in enumerate(table):
        assert index_of(vs, dict(zip(vs, row.tolist()))) == r
        assert instantiation_at(vs, r) == Instantiation(Literal(v, int(x)) for v, x in zip(vs, row))


arities = st.lists(st.integers(2, 4), min_size=0, max_size=12).filter(
    lambda a: state_count(Variable(f"v{i}", tuple(map(str, range(k)))) for i, k in enumerate(a)) <= 4096
)


def make_vars(ar):
    return [Variable(f"v{i}", tuple(str(x) for x in range(k)), order=i) for i, k in enumerate(ar)]


@settings(max_examples=60, deadline=None)
@given(arities)
def test_index_is_a_bijection(ar):
    vs = make_vars(ar)
    seen = sorted(index_of(vs, dict(zip(vs, combo))) for combo in itertools.product(*(range(k) for k in ar)))
    assert seen == list(range(state_count(vs)))


@settings(max_examples=60, deadline=None)
@given(arities, st.data())
def test_generate_count_and_consistency(ar, data):
    vs = make_vars(ar)
    env = AssignmentEnv()
    fixed = [v for v in vs if data.draw(st.booleans())]
    asserted = Instantiation(Literal(v, data.draw(st.integers(0, v.size - 1))) for v in fixed)
    env.assert_(asserted)
    out = generate_instantiations(vs, env)
    free = [v for v in vs if v not in fixed]
    assert len(out) == state_count(free)
    assert len(set(out)) == len(out)
    assert all(set(i.variables) == set(free) for i in out)
    assert all(i.consistent_with(asserted) for i in out)


@settings(max_examples=100, deadline=None)
@given(st.sets(st.sampled_from("ABCDE")), st.sets(st.sampled_from("ABCDE")), st.sets(st.sampled_from("ABCDE")))
def test_project_composes(lit_vars, s, t):
    by = {v.name: v for v in (A, B, C, D, E)}
    inst = Instantiation(Literal(by[n], 1) for n in lit_vars)
    clause = Clause(Literal(by[n], 0) for n in lit_vars)
    S, T = {by[n] for n in s}, {by[n] for n in t}
    assert project(project(inst, S), T) == project(inst, S & T)
    assert project(project(clause, S), T) == project(clause, S & T)
