"""Jointrees over the non-assumables of an SSD.

Text format::

    clique <id> <var> ...
    edge <id> <id>
    assign <component-output> <id>     optional, overrides automatic assignment

``assign`` lines let a hand-written jointree pin a specific component
assignment; components without one fall back to :func:`assign_components`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, ValidationError
from .logic import Variable, ordered, state_count
from .ssd import SSD, ValidationReport, Violation

ComponentAssignment = dict[Variable, int]


@dataclass(frozen=True)
class Jointree:
    cliques: tuple[tuple[Variable, ...], ...]
    edges: tuple[tuple[int, int], ...]
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.ids:
            object.__setattr__(self, "ids", tuple(f"C{i + 1}" for i in range(len(self.cliques))))
        if len(self.ids) != len(self.cliques):
            raise ValueError("one id per clique required")
        norm = tuple(sorted((min(i, j), max(i, j)) for i, j in self.edges))
        object.__setattr__(self, "edges", norm)

    def __len__(self):
        return len(self.cliques)

    def neighbors(self, i: int) -> list[int]:
        out = [b if a == i else a for a, b in self.edges if i in (a, b)]
        return sorted(out)

    def sepset(self, i: int, j: int) -> tuple[Variable, ...]:
        other = set(self.cliques[j])
        return tuple(v for v in self.cliques[i] if v in other)

    def clique_index(self, ident: str) -> int:
        try:
            return self.ids.index(ident)
        except ValueError:
            raise KeyError(f"no clique {ident!r}") from None

    @property
    def width(self) -> int:
        return max((len(c) for c in self.cliques), default=0) - 1

    def default_pivot(self) -> int:
        """Lowest-index clique of maximum size."""
        best = max(len(c) for c in self.cliques)
        return next(i for i, c in enumerate(self.cliques) if len(c) == best)


@dataclass(frozen=True)
class JointreeStats:
    width: int
    predicted_cost: int
    cliques: int


def stats(jt: Jointree, observed: Iterable[Variable] = ()) -> JointreeStats:
    """Width and the sum over cliques of |C| times the state count of C minus the observed set."""
    seen = set(observed)
    cost = sum(len(c) * state_count(v for v in c if v not in seen) for c in jt.cliques)
    return JointreeStats(jt.width, cost, len(jt))


# -- construction -----------------------------------------------------------


def build_jointree(ssd: SSD) -> Jointree:
    if not ssd.non_assumables:
        raise ValidationError("structure has no nodes")
    if ssd.is_tree():
        return _family_jointree(ssd)
    return _minfill_jointree(ssd)


def _family_jointree(ssd: SSD) -> Jointree:
    cliques: dict[int, frozenset] = {}
    adj: dict[int, set[int]] = defaultdict(set)
    owner = {v: k for k, v in enumerate(ssd.non_assumables)}
    for k, v in enumerate(ssd.non_assumables):
        cliques[k] = frozenset((v,) + ssd.parents(v))
        adj[k]
        for p in ssd.parents(v):
            adj[k].add(owner[p])
            adj[owner[p]].add(k)

    changed = True
    while changed:
        changed = False
        for i in sorted(cliques):
            host = next((j for j in sorted(adj[i]) if cliques[i] <= cliques[j]), None)
            if host is None:
                continue
            for k in adj.pop(i):
                adj[k].discard(i)
                if k != host:
                    adj[k].add(host)
                    adj[host].add(k)
            del cliques[i]
            changed = True
            break

    keys = sorted(cliques)
    pos = {k: n for n, k in enumerate(keys)}
    edges = {(pos[a], pos[b]) for a in keys for b in adj[a] if a < b}
    return _join_pieces([ordered(cliques[k]) for k in keys], sorted(edges))


def _join_pieces(cliques: list[tuple[Variable, ...]], edges: list[tuple[int, int]]) -> Jointree:
    """Link disconnected subtrees with empty-sepset edges so the result is a single tree."""
    parent = list(range(len(cliques)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    edges = list(edges)
    for i in range(1, len(cliques)):
        if find(i) != find(0):
            edges.append((0, i))
            parent[find(i)] = find(0)
    return Jointree(tuple(cliques), tuple(edges))


def _minfill_jointree(ssd: SSD) -> Jointree:
    nodes = list(ssd.non_assumables)
    adj: dict[Variable, set[Variable]] = {v: set() for v in nodes}
    for v in nodes:
        fam = (v,) + ssd.parents(v)
        for a in fam:
            for b in fam:
                if a != b:
                    adj[a].add(b)

    rank = {v: k for k, v in enumerate(nodes)}
    remaining = set(nodes)
    elim_cliques: list[frozenset] = []
    while remaining:
        def fill(v):
            nb = list(adj[v] & remaining)
            return sum(1 for x in range(len(nb)) for y in range(x + 1, len(nb)) if nb[y] not in adj[nb[x]])

        v = min(remaining, key=lambda u: (fill(u), rank[u]))
        nb = adj[v] & remaining
        for a in nb:
            adj[a] |= nb - {a}
        elim_cliques.append(frozenset(nb | {v}))
        remaining.discard(v)

    maximal: list[frozenset] = []
    for c in elim_cliques:
        if any(c <= m for m in maximal):
            continue
        maximal = [m for m in maximal if not m < c]
        maximal.append(c)

    # Kruskal on sepset sizes; zero-weight pairs join disconnected pieces
    pairs = sorted(
        ((-len(maximal[i] & maximal[j]), i, j) for i in range(len(maximal)) for j in range(i + 1, len(maximal)))
    )
    parent = list(range(len(maximal)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for _, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
    return Jointree(tuple(ordered(c) for c in maximal), tuple(edges))


# -- validation and assignment ----------------------------------------------


def _tree_violations(jt: Jointree) -> list[Violation]:
    out = []
    n = len(jt)
    for a, b in jt.edges:
        if a == b or not (0 <= a < n and 0 <= b < n):
            out.append(Violation("tree", None, "bad edge", f"{a}-{b}"))
            return out
    if len(set(jt.edges)) != len(jt.edges):
        out.append(Violation("tree", None, "duplicate edge"))
    if len(jt.edges) != n - 1:
        out.append(Violation("tree", None, f"{n} cliques need {n - 1} edges, found {len(jt.edges)}"))
    seen = {0} if n else set()
    stack = [0] if n else []
    while stack:
        i = stack.pop()
        for k in jt.neighbors(i):
            if k not in seen:
                seen.add(k)
                stack.append(k)
    if len(seen) != n:
        missing = [jt.ids[i] for i in range(n) if i not in seen]
        out.append(Violation("tree", None, "cliques are not connected", " ".join(missing)))
    return out


def validate_jointree(
    ssd: SSD,
    jt: Jointree,
    assignment: Mapping[Variable, int] | None = None,
) -> ValidationReport:
    report = ValidationReport("jointree")
    out = report.violations
    if not jt.cliques:
        out.append(Violation("tree", None, "jointree has no cliques"))
        return report
    known = set(ssd.non_assumables)
    for i, c in enumerate(jt.cliques):
        for v in c:
            if v not in known:
                out.append(Violation("scope", jt.ids[i], f"{v.name} is not a non-assumable of the system"))
    tree_problems = _tree_violations(jt)
    out.extend(tree_problems)

    for comp in ssd.components:
        ports = set(comp.ports)
        if not any(ports <= set(c) for c in jt.cliques):
            out.append(Violation(
                "coverage", comp.output.name, "no clique contains all ports",
                " ".join(v.name for v in comp.ports),
            ))

    if not tree_problems:
        holders = defaultdict(list)
        for i, c in enumerate(jt.cliques):
            for v in c:
                holders[v].append(i)
        for v, idx in holders.items():
            if not _induces_subtree(jt, set(idx)):
                out.append(Violation(
                    "jointree-property", None,
                    f"cliques containing {v.name} are not connected",
                    v.name,
                ))

    if assignment is not None:
        for comp in ssd.components:
            i = assignment.get(comp.output)
            if i is None:
                out.append(Violation("assignment", comp.output.name, "component is not assigned"))
            elif not set(comp.ports) <= set(jt.cliques[i]):
                out.append(Violation(
                    "assignment", comp.output.name,
                    f"assigned clique {jt.ids[i]} does not contain all ports",
                ))
    return report


def _induces_subtree(jt: Jointree, members: set[int]) -> bool:
    start = min(members)
    seen = {start}
    stack = [start]
    while stack:
        i = stack.pop()
        for k in jt.neighbors(i):
            if k in members and k not in seen:
                seen.add(k)
                stack.append(k)
    return seen == members


def assign_components(
    ssd: SSD,
    jt: Jointree,
    fixed: Mapping[Variable, int] | None = None,
) -> ComponentAssignment:
    """Smallest clique containing each component's ports, lowest index on ties."""
    out: ComponentAssignment = {}
    fixed = fixed or {}
    for comp in ssd.components:
        if comp.output in fixed:
            out[comp.output] = fixed[comp.output]
            continue
        ports = set(comp.ports)
        candidates = [i for i, c in enumerate(jt.cliques) if ports <= set(c)]
        if not candidates:
            raise ValidationError(f"no clique covers the ports of {comp.output.name}")
        out[comp.output] = min(candidates, key=lambda i: (len(jt.cliques[i]), i))
    return out


def components_of(assignment: Mapping[Variable, int], clique: int) -> list[Variable]:
    return ordered(v for v, i in assignment.items() if i == clique)


# -- text format --------------------------------------------------------------


def parse_jointree(text: str, ssd: SSD) -> tuple[Jointree, ComponentAssignment]:
    """Parse a jointree file; returns the tree and any explicit ``assign`` entries."""
    ids: list[str] = []
    cliques: list[tuple[Variable, ...]] = []
    edges: list[tuple[int, int]] = []
    assigned: ComponentAssignment = {}
    pending_assign = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        kw, args = line[0], line[1:]
        if kw == "clique":
            if not args:
                raise ParseError("clique needs an id", lineno)
            if args[0] in ids:
                raise ParseError(f"duplicate clique id {args[0]}", lineno)
            members = []
            for name in args[1:]:
                v = ssd.by_name.get(name)
                if v is None:
                    raise ParseError(f"unknown variable {name!r}", lineno)
                if v.assumable:
                    raise ParseError(f"assumable {name} cannot appear in a clique", lineno)
                members.append(v)
            ids.append(args[0])
            cliques.append(ordered(members))
        elif kw == "edge":
            if len(args) != 2:
                raise ParseError("edge needs two clique ids", lineno)
            try:
                edges.append((ids.index(args[0]), ids.index(args[1])))
            except ValueError:
                raise ParseError(f"edge refers to an undeclared clique: {' '.join(args)}", lineno) from None
        elif kw == "assign":
            if len(args) != 2:
                raise ParseError("assign needs a component and a clique id", lineno)
            pending_assign.append((lineno, args[0], args[1]))
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno)
    if not cliques:
        raise ParseError("no cliques declared")
    for lineno, comp, ident in pending_assign:
        v = ssd.by_name.get(comp)
        if v is None or v.assumable:
            raise ParseError(f"unknown component {comp!r}", lineno)
        if ident not in ids:
            raise ParseError(f"unknown clique {ident!r}", lineno)
        if v in assigned:
            raise ParseError(f"component {comp} assigned twice", lineno)
        assigned[v] = ids.index(ident)
    return Jointree(tuple(cliques), tuple(edges), tuple(ids)), assigned


def format_jointree(jt: Jointree, assignment: Mapping[Variable, int] | None = None) -> str:
    lines = [f"clique {jt.ids[i]} {' '.join(v.name for v in c)}".rstrip() for i, c in enumerate(jt.cliques)]
    lines += [f"edge {jt.ids[a]} {jt.ids[b]}" for a, b in jt.edges]
    if assignment:
        for v in ordered(assignment):
            lines.append(f"assign {v.name} {jt.ids[assignment[v]]}")
    return "\n".join(lines) + "\n"


def edge_directions(jt: Jointree, pivot: int) -> Sequence[tuple[int, int]]:
    """Directed edges (child, parent) when the tree is rooted at ``pivot``."""
    out = []
    seen = {pivot}
    stack = [pivot]
    while stack:
        i = stack.pop()
        for k in jt.neighbors(i):
            if k not in seen:
                seen.add(k)
                out.append((k, i))
                stack.append(k)
    return out
