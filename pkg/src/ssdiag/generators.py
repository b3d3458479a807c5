"""Deterministic circuit generators and a few small reference systems."""

from __future__ import annotations

import itertools
import operator
import random
from functools import reduce
from typing import Callable, Sequence

from .logic import Clause, Instantiation, Literal, Variable
from .ssd import SSD, ComponentDescription, build_ssd

GateFn = Callable[..., int]

NOT: GateFn = lambda a: 1 - a
AND: GateFn = lambda *xs: int(all(xs))
OR: GateFn = lambda *xs: int(any(xs))
XOR: GateFn = lambda *xs: reduce(operator.xor, xs)


def gate(output: Variable, inputs: Sequence[Variable], fn: GateFn, health: Variable) -> ComponentDescription:
    """A healthy gate computes ``fn``; a faulty one is unconstrained.

    One clause per input row: ``row & health -> output == fn(row)``.
    """
    clauses = []
    for row in itertools.product(*(range(v.size) for v in inputs)):
        p = [Literal(v, 1 - x) for v, x in zip(inputs, row)] + [Literal(output, fn(*row))]
        clauses.append((Clause(p), Literal(health, health.healthy).negated_clause()))
    return ComponentDescription(output, tuple(inputs), tuple(clauses))


def _vars(names: str, assumable: bool = False) -> list[Variable]:
    return [Variable(n, assumable=assumable) for n in names.split()]


def inverter_and_circuit() -> SSD:
    """C = not A (health okX), D = A and B (health okY)."""
    A, B, C, D = _vars("A B C D")
    okX, okY = _vars("okX okY", assumable=True)
    return build_ssd([A, B, C, D, okX, okY], [gate(C, [A], NOT, okX), gate(D, [A, B], AND, okY)])


def three_gate_circuit() -> SSD:
    """C = not A (okX), D = A or B (okY), E = C and D (okZ)."""
    A, B, C, D, E = _vars("A B C D E")
    okX, okY, okZ = _vars("okX okY okZ", assumable=True)
    return build_ssd(
        [A, B, C, D, E, okX, okY, okZ],
        [gate(C, [A], NOT, okX), gate(D, [A, B], OR, okY), gate(E, [C, D], AND, okZ)],
    )


# Jointree for :func:`three_gate_circuit` with C1 in the middle and a fixed assignment.
THREE_GATE_JOINTREE = """\
clique C1 A C D
clique C2 A B D
clique C3 C D E
edge C1 C2
edge C1 C3
assign A C2
assign B C2
assign C C1
assign D C2
assign E C3
"""


def shared_power_circuit() -> SSD:
    """Inverter and and-gate that both depend on one power assumable."""
    A, B, C, D = _vars("A B C D")
    pwr, okX, okY = _vars("Pwr okX okY", assumable=True)
    nA, nB, nC, nD = (Literal(v, 0) for v in (A, B, C, D))
    pA, pB, pC, pD = (Literal(v, 1) for v in (A, B, C, D))
    off = Clause([Literal(pwr, 0), Literal(okX, 0)])
    offY = Clause([Literal(pwr, 0), Literal(okY, 0)])
    dc = ComponentDescription(C, (A,), (
        (Clause([nA, nC]), off),
        (Clause([pA, pC]), off),
        (Clause([nC]), Clause([Literal(pwr, 1)])),
    ))
    dd = ComponentDescription(D, (A, B), (
        (Clause([nA, nB, pD]), offY),
        (Clause([pA, nD]), offY),
        (Clause([pB, nD]), offY),
        (Clause([nD]), Clause([Literal(pwr, 1)])),
    ))
    return build_ssd([A, B, C, D, pwr, okX, okY], [dc, dd])


def chain_inverters(n: int) -> SSD:
    """x0 -> x1 -> ... -> xn, each link an inverter with its own health variable."""
    if n < 1:
        raise ValueError("chain needs at least one inverter")
    xs = [Variable(f"x{i}") for i in range(n + 1)]
    oks = [Variable(f"ok{i}", assumable=True) for i in range(1, n + 1)]
    comps = [gate(xs[i], [xs[i - 1]], NOT, oks[i - 1]) for i in range(1, n + 1)]
    return build_ssd(xs + oks, comps)


def ripple_adder(n: int) -> SSD:
    """n-bit ripple-carry adder of full adders, each made of two XOR, two AND and one OR gate.

    Bit ``i`` has inputs ``a{i} b{i} c{i}``, sum ``s{i}``, carry-out ``c{i+1}`` and
    internal wires ``x{i} p{i} q{i}``; gate health variables are
    ``okx{i} oks{i} okp{i} okq{i} okc{i}``.
    """
    if n < 1:
        raise ValueError("adder needs at least one bit")
    P: list[Variable] = []
    A: list[Variable] = []
    comps = []
    carry = Variable("c0")
    P.append(carry)
    for i in range(n):
        a, b = Variable(f"a{i}"), Variable(f"b{i}")
        x, s, p, q = (Variable(f"{w}{i}") for w in "xspq")
        cout = Variable(f"c{i + 1}")
        P += [a, b, x, s, p, q, cout]
        oks = [Variable(f"ok{w}{i}", assumable=True) for w in "xspqc"]
        A += oks
        comps += [
            gate(x, [a, b], XOR, oks[0]),
            gate(s, [x, carry], XOR, oks[1]),
            gate(p, [a, b], AND, oks[2]),
            gate(q, [x, carry], AND, oks[3]),
            gate(cout, [p, q], OR, oks[4]),
        ]
        carry = cout
    return build_ssd(P + A, comps)


def adder_observation(ssd: SSD, n: int, sums_high: Sequence[int]) -> Instantiation:
    """All inputs, carries and sums observed low, except the listed sum bits which are high."""
    lits = []
    for i in range(n):
        lits += [Literal(ssd.by_name[f"a{i}"], 0), Literal(ssd.by_name[f"b{i}"], 0)]
        lits.append(Literal(ssd.by_name[f"s{i}"], int(i in sums_high)))
    lits += [Literal(ssd.by_name[f"c{i}"], 0) for i in range(n + 1)]
    return Instantiation(lits)


# -- random systems -------------------------------------------------------------


def random_ssd(
    rng: random.Random,
    max_components: int = 6,
    max_atoms: int = 10,
    max_fanin: int = 3,
) -> SSD:
    """A random DAG of gates with random truth tables.

    Most gates carry one boolean health variable. Some get a second one (a
    fault flag that forces the output low when the gate is broken), and some
    use a three-valued mode variable ``ok / lo / hi`` with stuck-at semantics.
    """
    n = rng.randint(2, min(max_components, max_atoms - 1))
    nodes = [Variable(f"v{i}") for i in range(n)]
    assumables: list[Variable] = []
    comps = []
    budget = max_atoms - n
    roots = rng.randint(1, max(1, n // 2))
    for i in range(roots, n):
        if budget < 1:
            break
        out = nodes[i]
        k = rng.randint(1, min(max_fanin, i))
        inputs = sorted(rng.sample(nodes[:i], k), key=lambda v: v.name)
        table = {row: rng.randint(0, 1) for row in itertools.product((0, 1), repeat=k)}
        fn = lambda *row, table=table: table[row]
        style = rng.random()
        if style < 0.15:
            mode = Variable(f"m{i}", ("ok", "lo", "hi"), assumable=True)
            assumables.append(mode)
            budget -= 1
            comps.append(_mode_gate(out, inputs, fn, mode))
        elif style < 0.3 and budget >= 2:
            ok, flag = Variable(f"ok{i}", assumable=True), Variable(f"f{i}", assumable=True)
            assumables += [ok, flag]
            budget -= 2
            g = gate(out, inputs, fn, ok)
            extra = (Clause([Literal(out, 0)]), Clause([Literal(ok, 1), Literal(flag, 0)]))
            comps.append(ComponentDescription(out, g.inputs, g.clauses + (extra,)))
        else:
            ok = Variable(f"ok{i}", assumable=True)
            assumables.append(ok)
            budget -= 1
            comps.append(gate(out, inputs, fn, ok))
    return build_ssd(nodes + assumables, comps)


def _mode_gate(out: Variable, inputs: Sequence[Variable], fn: GateFn, mode: Variable) -> ComponentDescription:
    normal = Clause([Literal(mode, 1), Literal(mode, 2)])
    clauses = []
    for row in itertools.product((0, 1), repeat=len(inputs)):
        p = [Literal(v, 1 - x) for v, x in zip(inputs, row)] + [Literal(out, fn(*row))]
        clauses.append((Clause(p), normal))
    clauses.append((Clause([Literal(out, 0)]), Clause([Literal(mode, 0), Literal(mode, 2)])))
    clauses.append((Clause([Literal(out, 1)]), Clause([Literal(mode, 0), Literal(mode, 1)])))
    return ComponentDescription(out, tuple(inputs), tuple(clauses))


def simulate(ssd: SSD, health: Instantiation, roots: Instantiation, rng: random.Random) -> Instantiation:
    """One behaviour of the system: roots as given, each other node set to a random value its
    description allows under the health state (local consistency makes one exist)."""
    values = {**health.as_dict(), **roots.as_dict()}
    for var in _topological(ssd):
        if var in values:
            continue
        comp = ssd.component(var)
        allowed = []
        for o in range(var.size):
            values[var] = o
            if all(p.satisfied_by(values) or a.satisfied_by(values) for p, a in comp.clauses):
                allowed.append(o)
        if not allowed:
            raise ValueError(f"{var.name} has no consistent value; the description is not locally consistent")
        values[var] = rng.choice(allowed)
    return Instantiation(Literal(v, values[v]) for v in ssd.non_assumables)


def _topological(ssd: SSD) -> list[Variable]:
    out: list[Variable] = []
    done: set[Variable] = set()

    def visit(v):
        if v in done:
            return
        for p in ssd.parents(v):
            visit(p)
        done.add(v)
        out.append(v)

    for v in ssd.non_assumables:
        visit(v)
    return out


def random_observation(ssd: SSD, rng: random.Random, p_observe: float = 0.5) -> Instantiation:
    """Either a random partial assignment or a partial view of a simulated (possibly faulty) run."""
    observed = [v for v in ssd.non_assumables if rng.random() < p_observe]
    if rng.random() < 0.5:
        return Instantiation(Literal(v, rng.randrange(v.size)) for v in observed)
    health = Instantiation(
        Literal(a, a.healthy if rng.random() < 0.7 else rng.randrange(a.size)) for a in ssd.assumables
    )
    roots = Instantiation(Literal(v, rng.randrange(v.size)) for v in ssd.non_assumables if not ssd.parents(v))
    run = simulate(ssd, health, roots, rng)
    keep = set(observed)
    return Instantiation(lit for lit in run if lit.var in keep)


def random_dag_ssd(rng: random.Random, max_nodes: int = 12, max_fanin: int = 3) -> SSD:
    """Structure-only system (no clauses) for jointree tests."""
    n = rng.randint(1, max_nodes)
    nodes = [Variable(f"n{i}") for i in range(n)]
    comps = []
    for i in range(1, n):
        k = rng.randint(0, min(max_fanin, i))
        comps.append(ComponentDescription(nodes[i], tuple(rng.sample(nodes[:i], k))))
    return build_ssd(nodes, comps)
