"""Cost functions and extraction of cost-minimal diagnoses from a compiled consequence.

Costs are non-negative integers combined by addition. Extraction runs in two
passes over the graph: :func:`prune` computes the minimal cost below each node
and which children attain it; :func:`instantiations` then assembles the
minimal terms bottom-up along surviving links only. Neither pass modifies the
graph, so one compiled consequence can be queried with several cost functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ExtractionError, NotDecomposableError, ParseError, ValidationError
from .logic import Instantiation, Literal, Variable, ordered, parse_literal
from .nnf import AND, LITERAL, NnfGraph

INF = math.inf


@dataclass(frozen=True)
class CostFunction:
    name: str
    costs: Mapping[Literal, int]

    def __call__(self, lit: Literal) -> int:
        return self.costs.get(lit, 0)

    def cost_of(self, inst: Iterable[Literal]) -> int:
        return sum(self(lit) for lit in inst)

    def zero_cost_values(self, var: Variable) -> list[int]:
        return [v for v in range(var.size) if self(Literal(var, v)) == 0]


def make_cardinality(assumables: Iterable[Variable]) -> CostFunction:
    """Cost 1 for each non-healthy value."""
    costs = {}
    for var in assumables:
        for v in range(var.size):
            costs[Literal(var, v)] = 0 if v == var.healthy else 1
    return CostFunction("cardinality", costs)


def parse_ranks(text: str, assumables: Sequence[Variable]) -> dict[Literal, int]:
    """Lines of ``<literal> <integer>``; ``#`` comments allowed."""
    by_name = {v.name: v for v in assumables}
    ranks: dict[Literal, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise ParseError("expected '<literal> <integer>'", lineno)
        try:
            lit = parse_literal(tokens[0], by_name)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        try:
            rank = int(tokens[1])
        except ValueError:
            raise ParseError(f"rank {tokens[1]!r} is not an integer", lineno) from None
        if lit in ranks:
            raise ParseError(f"{lit} ranked twice", lineno)
        ranks[lit] = rank
    return ranks


def make_kappa(assumables: Sequence[Variable], ranks: str | Mapping[Literal, int]) -> CostFunction:
    """Integer ranks read from text (or a mapping); unlisted literals rank 0."""
    if isinstance(ranks, str):
        ranks = parse_ranks(ranks, assumables)
    costs = {Literal(var, v): 0 for var in assumables for v in range(var.size)}
    costs.update(ranks)
    cf = CostFunction("kappa", costs)
    validate_cost_function(cf, assumables)
    return cf


def validate_cost_function(cf: CostFunction, assumables: Iterable[Variable]) -> None:
    for lit, c in cf.costs.items():
        if not isinstance(c, int) or c < 0:
            raise ValidationError(f"cost of {lit} must be a non-negative integer, got {c!r}")
    for var in assumables:
        if not cf.zero_cost_values(var):
            raise ValidationError(f"{var.name} has no zero-cost value")


# -- extraction ---------------------------------------------------------------


class ExtractionState:
    """Per-node minimal costs, surviving children and (once assembled) minimal terms.

    Terms are held as integer bit masks, one bit per literal, so that joining
    the terms of disjoint conjuncts is a single ``|`` and duplicate terms
    collapse exactly under set membership.
    """

    def __init__(self) -> None:
        self.cost: dict[int, float] = {}
        self.survivors: dict[int, tuple[int, ...]] = {}
        self.masks: dict[int, frozenset[int]] = {}
        self._bit: dict[Literal, int] = {}
        self._lits: list[Literal] = []

    def bit(self, lit: Literal) -> int:
        i = self._bit.get(lit)
        if i is None:
            i = self._bit[lit] = len(self._lits)
            self._lits.append(lit)
        return 1 << i

    def decode(self, mask: int) -> Instantiation:
        out = []
        while mask:
            low = mask & -mask
            out.append(self._lits[low.bit_length() - 1])
            mask ^= low
        return Instantiation(out)

    def terms_of(self, node: int) -> frozenset[Instantiation]:
        return frozenset(self.decode(m) for m in self.masks[node])

    @property
    def terms(self) -> dict[int, frozenset[Instantiation]]:
        return {n: self.terms_of(n) for n in self.masks}


def prune(g: NnfGraph, cf: CostFunction, node: int | None = None) -> ExtractionState:
    if not g.is_decomposable(node):
        raise NotDecomposableError("extraction needs a decomposable graph")
    state = ExtractionState()
    for n in g.postorder(node):
        kind = g.kind(n)
        kids = g.children(n)
        if kind == LITERAL:
            state.cost[n] = cf(g.literal_of(n))
            state.survivors[n] = ()
        elif kind == AND:
            state.cost[n] = sum(state.cost[c] for c in kids)
            state.survivors[n] = kids if state.cost[n] < INF else ()
        else:
            best = min((state.cost[c] for c in kids), default=INF)
            state.cost[n] = best
            state.survivors[n] = tuple(c for c in kids if state.cost[c] == best) if best < INF else ()
    return state


def extend(terms: Iterable[Instantiation], variables: Iterable[Variable], cf: CostFunction) -> set[Instantiation]:
    """Cross each term with every zero-cost literal of each added variable."""
    terms = set(terms)
    for var in ordered(variables):
        zeros = [Literal(var, v) for v in cf.zero_cost_values(var)]
        if not zeros:
            raise ValidationError(f"{var.name} has no zero-cost value")
        terms = {t.union((z,)) for t in terms for z in zeros}
    return terms


def _extend_masks(state: ExtractionState, masks: Iterable[int], variables: Iterable[Variable], cf: CostFunction) -> set[int]:
    out = set(masks)
    for var in ordered(variables):
        zeros = [state.bit(Literal(var, v)) for v in cf.zero_cost_values(var)]
        if not zeros:
            raise ValidationError(f"{var.name} has no zero-cost value")
        out = {m | z for m in out for z in zeros}
    return out


def instantiations(g: NnfGraph, state: ExtractionState, cf: CostFunction, node: int | None = None) -> frozenset[Instantiation]:
    """Minimal-cost terms of ``node``, computed along surviving links only."""
    root = g.root if node is None else node
    masks = state.masks
    stack = [(root, False)]
    while stack:
        n, expanded = stack.pop()
        if n in masks:
            continue
        if not expanded:
            stack.append((n, True))
            stack.extend((c, False) for c in state.survivors[n] if c not in masks)
            continue
        masks[n] = _masks_of(g, state, cf, n)
        for c in state.survivors[n]:
            if len(masks[c]) > len(masks[n]):
                raise ExtractionError(
                    f"surviving child {c} holds {len(masks[c])} terms, more than parent {n}"
                    f" ({len(masks[n])})"
                )
    return state.terms_of(root)


def _masks_of(g: NnfGraph, state: ExtractionState, cf: CostFunction, n: int) -> frozenset[int]:
    kind = g.kind(n)
    if kind == LITERAL:
        return frozenset((state.bit(g.literal_of(n)),))
    if state.cost[n] == INF:
        return frozenset()
    if kind == AND:
        # conjuncts mention disjoint atoms (checked by prune), so | never clashes
        parts = [state.masks[c] for c in state.survivors[n]]
        if all(len(p) == 1 for p in parts):
            m = 0
            for p in parts:
                for x in p:
                    m |= x
            return frozenset((m,))
        out = set()
        for combo in itertools.product(*parts):
            m = 0
            for x in combo:
                m |= x
            out.add(m)
        return frozenset(out)
    atoms = g.atoms_of(n)
    out: set[int] = set()
    for c in state.survivors[n]:
        below = g.atoms_of(c)
        if len(below) == len(atoms):
            out |= state.masks[c]
        else:
            out |= _extend_masks(state, state.masks[c], atoms - below, cf)
    return frozenset(out)


@dataclass(frozen=True)
class DiagnosisResult:
    cost: float
    diagnoses: tuple[Instantiation, ...]

    @property
    def status(self) -> str:
        return "ok" if self.diagnoses else "no-diagnosis"

    def format(self) -> str:
        if not self.diagnoses:
            return "cost inf\n"
        lines = sorted(str(d) for d in self.diagnoses)
        return "\n".join([f"cost {self.cost}"] + lines) + "\n"


def minimal_diagnoses(
    assumables: Sequence[Variable],
    compiled: NnfGraph,
    cf: CostFunction,
) -> DiagnosisResult:
    """Full assumable instantiations of minimal cost that satisfy ``compiled``."""
    validate_cost_function(cf, assumables)
    atoms = compiled.atoms_of()
    known = set(assumables)
    unknown = [v.name for v in atoms if v not in known]
    if unknown:
        raise ValidationError("consequence mentions non-assumables: " + ", ".join(sorted(unknown)))
    state = prune(compiled, cf)
    root_cost = state.cost[compiled.root]
    if root_cost == INF:
        return DiagnosisResult(INF, ())
    terms = instantiations(compiled, state, cf)
    full = extend(terms, [v for v in assumables if v not in atoms], cf)
    return DiagnosisResult(int(root_cost), tuple(sorted(full)))


def check_term_invariants(g: NnfGraph, state: ExtractionState, cf: CostFunction) -> list[str]:
    """Each computed term entails its node, costs the node's cost, and covers exactly its atoms."""
    problems = []
    for n in state.masks:
        terms = state.terms_of(n)
        atoms = g.atoms_of(n)
        for t in terms:
            if set(t.variables) != set(atoms):
                problems.append(f"node {n}: term {t} does not cover exactly the node's atoms")
            elif cf.cost_of(t) != state.cost[n]:
                problems.append(f"node {n}: term {t} costs {cf.cost_of(t)}, node costs {state.cost[n]}")
            elif not g.evaluate(t, n):
                problems.append(f"node {n}: term {t} does not entail the node")
    return problems
