import math
import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, lits
from ssdiag.compile import compile_consequence
from ssdiag.diagnose import (
    CostFunction,
    check_term_invariants,
    extend,
    instantiations,
    make_cardinality,
    make_kappa,
    minimal_diagnoses,
    parse_ranks,
    prune,
    validate_cost_function,
)
from ssdiag.errors import ParseError, ValidationError
from ssdiag.generators import chain_inverters
from ssdiag.logic import Instantiation, Literal, Variable, instantiation_at, state_count
from ssdiag.nnf import NnfGraph
from strategies import boolean_vars, random_dnnf


@pytest.fixture
def consequence(three_gate, three_gate_jt):
    jt, assigned = three_gate_jt
    return compile_consequence(three_gate, lits("A E", three_gate), jt, assigned, pivot=0).graph


def test_cardinality_costs(three_gate):
    cf = make_cardinality(three_gate.assumables)
    okX = three_gate.by_name["okX"]
    assert cf(Literal(okX, 0)) == 1 and cf(Literal(okX, 1)) == 0


def test_cardinality_of_the_six_diagnoses(three_gate, consequence):
    cf = make_cardinality(three_gate.assumables)
    listed = [
        "okX okY !okZ", "okX !okY !okZ", "!okX okY okZ",
        "!okX okY !okZ", "!okX !okY okZ", "!okX !okY !okZ",
    ]
    insts = [lits(t, three_gate) for t in listed]
    assert set(insts) == consequence.enumerate_models(three_gate.assumables)
    assert [cf.cost_of(i) for i in insts] == [1, 2, 1, 2, 2, 3]


def test_cost_function_needs_a_zero_value():
    ok = Variable("okX", assumable=True)
    cf = CostFunction("custom", {Literal(ok, 1): 1, Literal(ok, 0): 2})
    with pytest.raises(ValidationError, match="zero-cost"):
        validate_cost_function(cf, [ok])
    with pytest.raises(ValidationError, match="non-negative"):
        validate_cost_function(CostFunction("custom", {Literal(ok, 0): -1}), [ok])


def test_kappa_from_file(three_gate):
    cf = make_kappa(three_gate.assumables, (DATA / "mode_ranks.txt").read_text())
    okY = three_gate.by_name["okY"]
    assert cf(Literal(okY, 0)) == 2 and cf(Literal(okY, 1)) == 0
    with pytest.raises(ParseError, match="line 1"):
        parse_ranks("okQ 1\n", three_gate.assumables)
    with pytest.raises(ParseError):
        parse_ranks("okX one\n", three_gate.assumables)
    with pytest.raises(ValidationError):
        make_kappa(three_gate.assumables, "okX 1\n!okX 1\n")


def test_prune_literal_and_false():
    ok = Variable("ok", assumable=True)
    g = NnfGraph()
    lit = g.new_literal_node(ok, 0)
    false = g.new_or_node()
    top = g.new_and_node()
    g.add_child(top, lit)
    g.add_child(top, false)
    g.root = top
    state = prune(g, make_cardinality([ok]))
    assert state.cost[lit] == 1
    assert state.cost[false] == math.inf and state.cost[top] == math.inf
    assert instantiations(g, state, make_cardinality([ok])) == frozenset()


def test_extraction_on_compiled_example(three_gate, consequence):
    cf = make_cardinality(three_gate.assumables)
    state = prune(consequence, cf)
    assert state.cost[consequence.root] == 1
    terms = instantiations(consequence, state, cf)
    assert {str(t) for t in terms} == {"!okX okY okZ", "okX okY !okZ"}
    assert check_term_invariants(consequence, state, cf) == []
    # survivors of every or-node are exactly the children of minimal cost
    for n in consequence.postorder():
        if consequence.is_or(n):
            kids = consequence.children(n)
            best = min((state.cost[k] for k in kids), default=math.inf)
            assert set(state.survivors[n]) == ({k for k in kids if state.cost[k] == best} if kids and best < math.inf else set())


def test_true_node_has_one_empty_term():
    g = NnfGraph()
    g.root = g.new_and_node()
    cf = make_cardinality([])
    assert instantiations(g, prune(g, cf), cf) == frozenset({Instantiation()})


def test_extend():
    okX, okY = Variable("okX", assumable=True, order=0), Variable("okY", assumable=True, order=1)
    cf = make_cardinality([okX, okY])
    start = {Instantiation([Literal(okX, 0)])}
    assert extend(start, [okY], cf) == {Instantiation([Literal(okX, 0), Literal(okY, 1)])}
    assert extend(start, [], cf) == start


def test_extend_multivalued_zero_cost_fanout():
    m = Variable("M", ("ok", "spare", "broken"), assumable=True)
    cf = CostFunction("kappa", {Literal(m, 0): 0, Literal(m, 1): 0, Literal(m, 2): 3})
    out = extend({Instantiation()}, [m], cf)
    assert {str(t) for t in out} == {"M=ok", "M=spare"}


def test_minimal_diagnoses_example(three_gate, consequence):
    result = minimal_diagnoses(three_gate.assumables, consequence, make_cardinality(three_gate.assumables))
    assert result.cost == 1 and result.status == "ok"
    assert {str(d) for d in result.diagnoses} == {"okX okY !okZ", "!okX okY okZ"}
    assert result.format() == "cost 1\n!okX okY okZ\nokX okY !okZ\n"


def test_consistent_observation_has_healthy_diagnosis(three_gate):
    out = compile_consequence(three_gate, lits("A !C D !E", three_gate))
    result = minimal_diagnoses(three_gate.assumables, out.graph, make_cardinality(three_gate.assumables))
    assert result.cost == 0
    assert lits("okX okY okZ", three_gate) in result.diagnoses


def test_no_diagnosis_status():
    ok = Variable("ok", assumable=True)
    g = NnfGraph()
    g.root = g.new_or_node()
    result = minimal_diagnoses([ok], g, make_cardinality([ok]))
    assert result.status == "no-diagnosis" and result.diagnoses == ()
    assert result.format() == "cost inf\n"


def test_unmentioned_assumables_are_completed_healthy(three_gate):
    out = compile_consequence(three_gate, lits("C D", three_gate))
    result = minimal_diagnoses(three_gate.assumables, out.graph, make_cardinality(three_gate.assumables))
    assert result.diagnoses == (lits("okX okY okZ", three_gate),)


def test_rejects_non_assumable_atoms(three_gate):
    g = NnfGraph()
    g.root = g.new_literal_node(three_gate.by_name["A"], 1)
    with pytest.raises(ValidationError):
        minimal_diagnoses(three_gate.assumables, g, make_cardinality(three_gate.assumables))


def brute_min_inst(g, node, variables, cf):
    """Minimal-cost instantiations of exactly ``atoms_of(node)`` that satisfy it."""
    atoms = sorted(g.atoms_of(node), key=lambda v: v.order)
    models = [
        m for m in (instantiation_at(atoms, r) for r in range(state_count(atoms)))
        if g.evaluate(m, node)
    ]
    if not models:
        return math.inf, set()
    best = min(cf.cost_of(m) for m in models)
    return best, {m for m in models if cf.cost_of(m) == best}


def random_cost(rng, variables):
    costs = {}
    for v in variables:
        zero = rng.randrange(v.size)
        for x in range(v.size):
            costs[Literal(v, x)] = 0 if x == zero else rng.randint(0, 3)
    return CostFunction("kappa", costs)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 9), st.booleans())
def test_extraction_matches_brute_force(seed, n, kappa):
    rng = random.Random(seed)
    vs = boolean_vars(n, "h", assumable=True)
    vs[-1] = Variable(vs[-1].name, ("ok", "lo", "hi"), assumable=True, order=n - 1)
    g = random_dnnf(rng, vs)
    cf = random_cost(rng, vs) if kappa else make_cardinality(vs)
    state = prune(g, cf)
    instantiations(g, state, cf)
    assert check_term_invariants(g, state, cf) == []
    for node in state.masks:
        terms = state.terms_of(node)
        cost, expected = brute_min_inst(g, node, vs, cf)
        assert state.cost[node] == cost
        assert terms == expected


def test_extraction_time_scales_with_graph_size():
    """Doubling the graph at a fixed answer count should not much more than double the time."""
    def best_time(n):
        ssd = chain_inverters(n)
        g = compile_consequence(ssd, Instantiation()).graph
        cf = make_cardinality(ssd.assumables)
        times = []
        for _ in range(5):
            t0 = time.perf_counter()
            result = minimal_diagnoses(ssd.assumables, g, cf)
            times.append(time.perf_counter() - t0)
        assert len(result.diagnoses) == 1
        return min(times)

    assert best_time(400) <= 3 * best_time(200)
