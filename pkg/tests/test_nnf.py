import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssdiag.errors import CapExceededError, CycleError, NotDecomposableError, ParseError
from ssdiag.logic import Instantiation, Literal, Variable, state_count
from ssdiag.nnf import NnfGraph, conjoin, from_dnf, parse_nnf
from strategies import boolean_vars, random_dnnf

okX, okY, okZ = (Variable(n, assumable=True, order=i) for i, n in enumerate(["okX", "okY", "okZ"]))


def eight_node_graph():
    """(!okX & (!okZ | false)) | ((!okZ | false) & true), built call by call."""
    g = NnfGraph()
    n1 = g.new_literal_node(okZ, 0)
    n2 = g.new_or_node()
    n3 = g.new_or_node()
    g.add_child(n3, n1)
    g.add_child(n3, n2)
    n4 = g.new_literal_node(okX, 0)
    n5 = g.new_and_node()
    g.add_child(n5, n3)
    g.add_child(n5, n4)
    n6 = g.new_and_node()
    n7 = g.new_and_node()
    g.add_child(n7, n3)
    g.add_child(n7, n6)
    n8 = g.new_or_node()
    g.add_child(n8, n5)
    g.add_child(n8, n7)
    g.root = n8
    return g


def clause_graph(*lits):
    g, root = from_dnf([[lit] for lit in lits])
    g.root = root
    return g


def test_eight_node_example_structure():
    g = eight_node_graph()
    assert g.node_count() == 8
    assert g.edge_count() == 8
    assert g.atoms_of() == {okX, okZ}
    assert g.is_decomposable()
    # equivalent to !okZ
    assert g.enumerate_models([okX, okZ]) == {
        Instantiation([Literal(okX, x), Literal(okZ, 0)]) for x in (0, 1)
    }


def test_constants():
    g = NnfGraph()
    t, f = g.new_and_node(), g.new_or_node()
    assert g.is_true(t) and g.is_false(f)
    assert g.evaluate({}, t) is True
    assert g.evaluate({}, f) is False
    assert g.atoms_of(t) == frozenset()
    g.root = t
    assert len(g.enumerate_models([okX])) == 2
    g.root = f
    assert not g.satisfiable()


def test_literal_atoms():
    g = NnfGraph()
    n = g.new_literal_node(okZ, 0)
    assert g.atoms_of(n) == {okZ}


def test_cycles_rejected():
    g = NnfGraph()
    a, b = g.new_and_node(), g.new_or_node()
    g.add_child(a, b)
    with pytest.raises(CycleError):
        g.add_child(b, a)
    with pytest.raises(CycleError):
        g.add_child(a, a)
    lit = g.new_literal_node(okX, 1)
    with pytest.raises(ValueError):
        g.add_child(lit, a)
    with pytest.raises(IndexError):
        g.add_child(a, 99)


def test_frozen_graph_is_read_only():
    g = eight_node_graph().freeze()
    with pytest.raises(RuntimeError):
        g.new_and_node()


def test_decomposability():
    g = NnfGraph()
    conj = g.new_and_node()
    g.add_child(conj, g.new_literal_node(okX, 1))
    g.add_child(conj, g.new_literal_node(okX, 0))
    g.root = conj
    assert not g.is_decomposable()
    with pytest.raises(NotDecomposableError):
        g.satisfiable()


def test_dnf_is_decomposable():
    g, root = from_dnf([[Literal(okX, 0), Literal(okY, 1)], [Literal(okZ, 0), Literal(okX, 1)]])
    g.root = root
    assert g.is_decomposable()


def test_evaluate_and_models_of_clause():
    g = clause_graph(Literal(okX, 0), Literal(okY, 0))
    assert g.evaluate(Instantiation([Literal(okX, 1), Literal(okY, 1)])) is False
    assert len(g.enumerate_models([okX, okY])) == 3
    with pytest.raises(ValueError):
        g.evaluate({okX: 1})


def test_model_cap():
    vs = boolean_vars(6)
    g = clause_graph(Literal(vs[0], 1))
    with pytest.raises(CapExceededError):
        g.enumerate_models(vs, cap=32)


def test_equivalence_de_morgan():
    g1 = clause_graph(Literal(okX, 0), Literal(okY, 0))
    # not(okX and okY), pushed inwards by hand
    g2 = NnfGraph()
    disj = g2.new_or_node()
    for v in (okY, okX):
        conj = g2.new_and_node()
        g2.add_child(conj, g2.new_literal_node(v, 0))
        g2.add_child(disj, conj)
    g2.root = disj
    assert g1.equivalent(g2, [okX, okY])
    assert g1.equivalent(g1, [okX, okY])
    assert not g1.equivalent(clause_graph(Literal(okX, 0)), [okX, okY])


def test_serialize_roundtrip():
    g = eight_node_graph()
    text = g.serialize()
    assert text.splitlines()[0] == "nnf 8 8 2"
    back = parse_nnf(text, [okX, okY, okZ])
    assert back.serialize() == text
    assert back.equivalent(g, [okX, okZ])


@pytest.mark.parametrize(
    "text, line",
    [
        ("nnf 1 0 1\nL x 2\n", 2),
        ("nnf 2 1 1\nA 1 1\nL x 1\n", 2),
        ("nnf 1 0 1\nQ 0\n", 2),
        ("nnf 1 1 1\nO 2 0\n", 2),
        ("bogus\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as exc:
        parse_nnf(text)
    assert exc.value.line == line


def test_parse_header_mismatch():
    with pytest.raises(ParseError):
        parse_nnf("nnf 3 0 1\nL x 1\n")


def test_conjoin_copies_and_conjoins():
    g1 = clause_graph(Literal(okX, 0))
    g2 = clause_graph(Literal(okY, 1))
    both = conjoin([g1, g2])
    assert both.enumerate_models([okX, okY]) == {Instantiation([Literal(okX, 0), Literal(okY, 1)])}


def test_multivalued_literals():
    m = Variable("M", ("ok", "lo", "hi"), assumable=True)
    g, root = from_dnf([[Literal(m, 1)], [Literal(m, 2)]])
    g.root = root
    assert g.enumerate_models([m]) == {Instantiation([Literal(m, 1)]), Instantiation([Literal(m, 2)])}


def brute_models(g, vs):
    out = set()
    for combo in itertools.product(*(range(v.size) for v in vs)):
        values = dict(zip(vs, combo))
        if g.evaluate(values):
            out.add(Instantiation.from_values(values))
    return out


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8))
def test_random_dnnf_properties(seed, n):
    rng = random.Random(seed)
    vs = boolean_vars(n)
    vs[0] = Variable("x0", ("a", "b", "c"), order=0)
    g = random_dnnf(rng, vs)
    assert g.is_decomposable()
    models = brute_models(g, vs)
    # vectorized evaluation agrees with the per-row evaluator
    assert g.enumerate_models(vs) == models
    atoms = sorted(g.atoms_of(), key=lambda v: v.order)
    assert g.satisfiable() == bool(g.enumerate_models(atoms) if atoms else g.evaluate({}))
    for n_ in g.postorder():
        if not g.is_literal(n_):
            union = frozenset().union(*(g.atoms_of(c) for c in g.children(n_)))
            assert g.atoms_of(n_) == union
    assert parse_nnf(g.serialize(), vs).serialize() == g.serialize()
    assert g.simplified().enumerate_models(vs) == models
    assert g.simplified().is_decomposable()
