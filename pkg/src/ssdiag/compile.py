"""Compilation of an SSD and observation into a decomposable NNF consequence.

Two stages:

* :func:`component_consequences` tabulates, for every port instantiation of a
  component, the strongest health sentence it implies (a DNF over that
  component's assumables).
* :class:`CompilationSession` walks the jointree from a pivot clique, doing
  case analysis on clique instantiations and caching subtree results by the
  index of the separating sepset.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import CapExceededError, ValidationError
from .jointree import ComponentAssignment, Jointree, assign_components, build_jointree, components_of
from .logic import (
    AssignmentEnv,
    Clause,
    Instantiation,
    Literal,
    Variable,
    generate_instantiations,
    index,
    index_of,
    instantiation_at,
    state_count,
)
from .nnf import NnfGraph, conjoin, from_dnf, parse_nnf
from .ssd import SSD, ComponentDescription, cut_arcs, deshare_assumables, shared_assumables

DEFAULT_TABLE_CAP = 2**16

Term = tuple[Literal, ...]


def cnf_to_dnf(clauses: Sequence[Clause]) -> list[Term]:
    """Distribute a CNF into a DNF, dropping inconsistent, duplicate and subsumed terms."""
    terms: set[frozenset[Literal]] = {frozenset()}
    for clause in clauses:
        grown = set()
        for t in terms:
            if clause.literals & t:
                grown.add(t)
                continue
            assigned = {lit.var: lit.value for lit in t}
            for lit in clause.literals:
                if lit.var not in assigned:
                    grown.add(t | {lit})
        terms = _drop_subsumed(grown)
    key = lambda t: [(l.var.order, l.var.name, l.value) for l in t]
    return sorted((tuple(Instantiation(t)) for t in terms), key=key)


def _drop_subsumed(terms: set[frozenset[Literal]]) -> set[frozenset[Literal]]:
    by_size = sorted(terms, key=len)
    kept: list[frozenset[Literal]] = []
    for t in by_size:
        if not any(k <= t for k in kept):
            kept.append(t)
    return set(kept)


@dataclass
class ComponentConsequenceTable:
    """Per-port-instantiation consequences of one component, as nodes of a private graph."""

    component: Variable
    ports: tuple[Variable, ...]
    terms: list[list[Term]]
    graph: NnfGraph
    entries: list[int]

    def __len__(self):
        return len(self.entries)

    def lookup(self, values: Mapping[Variable, int]) -> int:
        return self.entries[index_of(self.ports, values)]


def component_consequences(cd: ComponentDescription, cap: int = DEFAULT_TABLE_CAP) -> ComponentConsequenceTable:
    ports = cd.ports
    n = state_count(ports)
    if n > cap:
        raise CapExceededError(f"consequence table of {cd.output.name}", n, cap)
    graph = NnfGraph()
    all_terms = []
    entries = []
    by_dnf: dict[tuple, int] = {}
    for l in range(n):
        gamma = instantiation_at(ports, l).as_dict()
        active = [a for p, a in cd.clauses if p.falsified_by(gamma)]
        terms = cnf_to_dnf(active)
        all_terms.append(terms)
        key = tuple(terms)
        if key not in by_dnf:
            by_dnf[key] = from_dnf(terms, graph)[1]
        entries.append(by_dnf[key])
    graph.freeze()
    return ComponentConsequenceTable(cd.output, ports, all_terms, graph, entries)


def consequence_tables(ssd: SSD, cap: int = DEFAULT_TABLE_CAP) -> dict[Variable, ComponentConsequenceTable]:
    return {c.output: component_consequences(c, cap) for c in ssd.components}


# -- system consequence -----------------------------------------------------

EMPTY = -1  # the auxiliary empty clique attached to the pivot


@dataclass
class EdgeCounters:
    cached: Counter = field(default_factory=Counter)
    noncached: Counter = field(default_factory=Counter)


class CompilationSession:
    """One compilation run: owns the assignment environment, caches and output graph."""

    def __init__(
        self,
        ssd: SSD,
        jt: Jointree,
        assignment: ComponentAssignment,
        tables: Mapping[Variable, ComponentConsequenceTable],
    ):
        missing = [c.output.name for c in ssd.components if c.output not in tables]
        if missing:
            raise ValidationError("no consequence table for " + ", ".join(missing))
        self.ssd = ssd
        self.jt = jt
        self.assignment = assignment
        self.tables = tables
        self._components = [components_of(assignment, i) for i in range(len(jt))]
        self._neighbors = [jt.neighbors(i) for i in range(len(jt))]
        self._reset()

    def _reset(self):
        self.env = AssignmentEnv()
        self.output = NnfGraph()
        self.caches: dict[tuple[int, int], dict[int, int]] = {}
        self.counters = EdgeCounters()
        self.case_nodes: list[int] = []  # or-nodes built by case analysis over clique states
        self.clique_calls = 0
        self.observation = Instantiation()
        self.pivot: int | None = None
        self._entry_memo: dict[Variable, dict[int, int]] = {v: {} for v in self.tables}
        self._copy_memo: dict[Variable, dict[int, int]] = {v: {} for v in self.tables}

    def sepset(self, i: int, j: int) -> tuple[Variable, ...]:
        return () if j == EMPTY else self.jt.sepset(i, j)

    def run(self, obs: Instantiation, pivot: int | None = None) -> NnfGraph:
        self._reset()
        pivot = self.jt.default_pivot() if pivot is None else pivot
        if not 0 <= pivot < len(self.jt):
            raise ValueError(f"pivot {pivot} out of range")
        known = set(self.ssd.non_assumables)
        for lit in obs:
            if lit.var not in known:
                raise ValidationError(f"observation mentions {lit.var.name}, not a non-assumable of the system")
        self.observation = obs
        self.pivot = pivot
        limit = 4 * len(self.jt) + 1000
        if sys.getrecursionlimit() < limit:
            sys.setrecursionlimit(limit)
        self.env.assert_(obs)
        try:
            root = self.subtree_consequence(pivot, EMPTY)
        finally:
            self.env.retract(obs)
        self.output.root = root
        return self.output

    def subtree_consequence(self, i: int, j: int) -> int:
        key = (i, j)
        l = index(self.sepset(i, j), self.env)
        cache = self.caches.setdefault(key, {})
        if l in cache:
            self.counters.cached[key] += 1
            return cache[l]
        self.counters.noncached[key] += 1
        g = self.output
        disj = g.new_or_node()
        self.case_nodes.append(disj)
        for alpha in generate_instantiations(self.jt.cliques[i], self.env):
            self.env.assert_(alpha)
            conj = g.new_and_node()
            g.add_child(conj, self.clique_consequence(i))
            for k in self._neighbors[i]:
                if k != j:
                    g.add_child(conj, self.subtree_consequence(k, i))
            g.add_child(disj, conj)
            self.env.retract(alpha)
        cache[l] = disj
        return disj

    def clique_consequence(self, i: int) -> int:
        self.clique_calls += 1
        conj = self.output.new_and_node()
        for comp in self._components[i]:
            table = self.tables[comp]
            self.output.add_child(conj, self._entry(table, index(table.ports, self.env)))
        return conj

    def _entry(self, table: ComponentConsequenceTable, l: int) -> int:
        memo = self._entry_memo[table.component]
        node = memo.get(l)
        if node is None:
            # one copy memo per table, so entries sharing a DNF share the copied node
            node = memo[l] = table.graph.copy_into(self.output, table.entries[l], self._copy_memo[table.component])
        return node

    def cache_bound_violations(self) -> list[str]:
        """Edges whose non-cached call count exceeds the state count of the unobserved sepset."""
        observed = set(self.observation.variables)
        out = []
        for (i, j), calls in sorted(self.counters.noncached.items()):
            bound = state_count(v for v in self.sepset(i, j) if v not in observed)
            if calls > bound:
                out.append(f"{self._edge_name(i, j)}: {calls} non-cached calls > bound {bound}")
        return out

    def _edge_name(self, i: int, j: int) -> str:
        return f"{self.jt.ids[i]}->{'C0' if j == EMPTY else self.jt.ids[j]}"

    def report(self) -> str:
        lines = [
            f"nodes {self.output.node_count()}",
            f"edges {self.output.edge_count()}",
            f"pivot {self.jt.ids[self.pivot]}",
        ]
        keys = sorted(set(self.counters.cached) | set(self.counters.noncached))
        for i, j in keys:
            lines.append(
                f"edge {self._edge_name(i, j)} noncached {self.counters.noncached[(i, j)]}"
                f" cached {self.counters.cached[(i, j)]}"
            )
        return "\n".join(lines) + "\n"


def system_consequence(
    ssd: SSD,
    jt: Jointree,
    assignment: ComponentAssignment,
    tables: Mapping[Variable, ComponentConsequenceTable],
    obs: Instantiation,
    pivot: int | None = None,
) -> NnfGraph:
    return CompilationSession(ssd, jt, assignment, tables).run(obs, pivot)


# -- end-to-end helper --------------------------------------------------------


@dataclass
class Compilation:
    graph: NnfGraph
    sessions: list[CompilationSession]
    pieces: list[tuple[SSD, Instantiation]]

    def cache_bound_violations(self) -> list[str]:
        return [v for s in self.sessions for v in s.cache_bound_violations()]

    def report(self) -> str:
        if len(self.sessions) == 1:
            return self.sessions[0].report()
        parts = [f"pieces {len(self.sessions)}", f"nodes {self.graph.node_count()}", f"edges {self.graph.edge_count()}"]
        for n, s in enumerate(self.sessions, 1):
            parts.append(f"piece {n}")
            parts.append(s.report().rstrip("\n"))
        return "\n".join(parts) + "\n"


def compile_consequence(
    ssd: SSD,
    obs: Instantiation,
    jointree: Jointree | None = None,
    assignment: ComponentAssignment | None = None,
    pivot: int | None = None,
    cut: bool = False,
    simplify: bool = False,
    cap: int = DEFAULT_TABLE_CAP,
) -> Compilation:
    """Compile ``obs`` against ``ssd``; shared assumables are de-shared first when no jointree is given.

    With ``cut`` the observed nodes' outgoing arcs are removed and each
    resulting piece gets its own jointree; the piece consequences are conjoined.
    """
    if shared_assumables(ssd):
        if jointree is not None:
            raise ValidationError("system shares assumables; de-share it before supplying a jointree")
        ssd = deshare_assumables(ssd)
    if cut:
        if jointree is not None:
            raise ValidationError("a supplied jointree cannot be combined with arc cutting")
        pieces = cut_arcs(ssd, obs)
    else:
        pieces = [(ssd, obs)]

    sessions = []
    graphs = []
    for piece, piece_obs in pieces:
        jt = jointree if jointree is not None else build_jointree(piece)
        assign = assign_components(piece, jt, assignment)
        session = CompilationSession(piece, jt, assign, consequence_tables(piece, cap))
        g = session.run(piece_obs, None if cut else pivot)
        sessions.append(session)
        graphs.append(g)

    if len(graphs) == 1 and pieces[0][0] is ssd:
        graph = graphs[0]
    else:
        # pieces carry renumbered copies of the variables; rebind literals to ``ssd``'s
        graph = conjoin([parse_nnf(g.serialize(), ssd.by_name) for g in graphs])
    if simplify:
        graph = graph.simplified()
    return Compilation(graph, sessions, pieces)
