"""Structured system descriptions: a DAG over non-assumables with one component per node.

Text format (``#`` starts a comment)::

    var <name> [<value> ...]          non-assumable, default domain 0 1
    assumable <name> [<value> ...]    health variable; first listed value is healthy
                                      (for the default 0 1 domain, 1 is healthy)
    component <output> [: <parent> ...]
    clause <output> : <p-literals> | <a-literals>

Each ``clause`` line is one disjunction of the output's description, split into
the part over ports and the part over assumables. Declaration order is the
global variable order.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import CapExceededError, ParseError, ValidationError
from .logic import (
    Clause,
    Instantiation,
    Literal,
    Variable,
    ordered,
    parse_literals,
    project,
    state_count,
)

DEFAULT_VALIDATION_CAP = 2**16

ClausePair = tuple[Clause, Clause]


@dataclass(frozen=True)
class ComponentDescription:
    output: Variable
    inputs: tuple[Variable, ...] = ()
    clauses: tuple[ClausePair, ...] = ()

    @property
    def ports(self) -> tuple[Variable, ...]:
        return ordered(self.inputs + (self.output,))

    @property
    def assumables(self) -> tuple[Variable, ...]:
        return ordered(lit.var for _, a in self.clauses for lit in a.literals)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return ordered(self.ports + self.assumables)


@dataclass(frozen=True)
class SSD:
    variables: tuple[Variable, ...]
    components: tuple[ComponentDescription, ...]

    @cached_property
    def by_name(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    @cached_property
    def non_assumables(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if not v.assumable)

    @cached_property
    def assumables(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if v.assumable)

    @cached_property
    def _components(self) -> dict[Variable, ComponentDescription]:
        return {c.output: c for c in self.components}

    def component(self, var: Variable | str) -> ComponentDescription:
        if isinstance(var, str):
            var = self.by_name[var]
        return self._components[var]

    def parents(self, var: Variable) -> tuple[Variable, ...]:
        return self._components[var].inputs

    @cached_property
    def _children(self) -> dict[Variable, tuple[Variable, ...]]:
        kids = defaultdict(list)
        for c in self.components:
            for p in c.inputs:
                kids[p].append(c.output)
        return {v: tuple(ordered(kids[v])) for v in self.non_assumables}

    def children(self, var: Variable) -> tuple[Variable, ...]:
        return self._children[var]

    def arcs(self) -> list[tuple[Variable, Variable]]:
        return [(p, c.output) for c in self.components for p in c.inputs]

    def connected_components(self) -> list[tuple[Variable, ...]]:
        """Weakly connected pieces of the structure, each in variable order."""
        seen: set[Variable] = set()
        pieces = []
        for v in self.non_assumables:
            if v in seen:
                continue
            piece = []
            stack = [v]
            seen.add(v)
            while stack:
                n = stack.pop()
                piece.append(n)
                for m in self.parents(n) + self.children(n):
                    if m not in seen:
                        seen.add(m)
                        stack.append(m)
            pieces.append(ordered(piece))
        return pieces

    def is_tree(self) -> bool:
        """True when the undirected structure has no cycles (a forest)."""
        arcs = len(self.arcs())
        return arcs == len(self.non_assumables) - len(self.connected_components())


def build_ssd(
    variables: Sequence[Variable],
    components: Iterable[ComponentDescription] = (),
) -> SSD:
    """Assemble an SSD, re-numbering variable order and adding empty root components where missing."""
    renumbered = {}
    for i, v in enumerate(variables):
        renumbered[v] = Variable(v.name, v.domain, v.assumable, i)

    def rv(v):
        return renumbered[v]

    def rc(clause):
        return Clause(Literal(rv(l.var), l.value) for l in clause.literals)

    given = {}
    for c in components:
        out = rv(c.output)
        if out in given:
            raise ValidationError(f"duplicate component {out.name}")
        given[out] = ComponentDescription(
            out,
            ordered(rv(p) for p in c.inputs),
            tuple((rc(p), rc(a)) for p, a in c.clauses),
        )
    comps = []
    for v in renumbered.values():
        if v.assumable:
            if v in given:
                raise ValidationError(f"assumable {v.name} cannot be a component output")
            continue
        comps.append(given.pop(v, ComponentDescription(v)))
    if given:
        raise ValidationError("components for undeclared variables: " + ", ".join(v.name for v in given))
    ssd = SSD(tuple(renumbered.values()), tuple(comps))
    cycle = _find_cycle(ssd)
    if cycle:
        raise ValidationError("structure has a cycle through " + " -> ".join(v.name for v in cycle))
    return ssd


def _find_cycle(ssd: SSD) -> list[Variable] | None:
    state: dict[Variable, int] = {}
    for start in ssd.non_assumables:
        if start in state:
            continue
        stack = [(start, iter(ssd.parents(start)))]
        path = [start]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
            elif state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            elif nxt not in state:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(ssd.parents(nxt))))
    return None


# -- parsing ----------------------------------------------------------------


def parse_ssd(text: str) -> SSD:
    variables: dict[str, Variable] = {}
    parents: dict[str, tuple[str, ...]] = {}
    component_line: dict[str, int] = {}
    clauses: dict[str, list[ClausePair]] = defaultdict(list)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword in ("var", "assumable"):
            tokens = rest.split()
            if not tokens:
                raise ParseError(f"{keyword} needs a name", lineno)
            name, values = tokens[0], tuple(tokens[1:]) or ("0", "1")
            if name in variables:
                raise ParseError(f"variable {name} declared twice", lineno)
            if any(ch in name for ch in "!=:|"):
                raise ParseError(f"bad variable name {name!r}", lineno)
            try:
                variables[name] = Variable(name, values, keyword == "assumable", len(variables))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
        elif keyword == "component":
            head, _, tail = rest.partition(":")
            out = _non_assumable(head.strip(), variables, lineno)
            if out.name in component_line:
                raise ParseError(
                    f"duplicate component {out.name} (first declared on line {component_line[out.name]})",
                    lineno,
                )
            component_line[out.name] = lineno
            ps = []
            for p in tail.split():
                pv = _non_assumable(p, variables, lineno)
                if pv == out:
                    raise ParseError(f"{out.name} cannot be its own parent", lineno)
                ps.append(pv.name)
            parents[out.name] = tuple(ps)
        elif keyword == "clause":
            head, sep, tail = rest.partition(":")
            if not sep:
                raise ParseError("clause needs '<output> : <p-literals> | <a-literals>'", lineno)
            out = _non_assumable(head.strip(), variables, lineno)
            p_text, _, a_text = tail.partition("|")
            p_lits = parse_literals(p_text, variables, lineno)
            a_lits = parse_literals(a_text, variables, lineno)
            for lit in p_lits:
                if lit.var.assumable:
                    raise ParseError(f"assumable {lit.var.name} on the port side of a clause", lineno)
            for lit in a_lits:
                if not lit.var.assumable:
                    raise ParseError(f"non-assumable {lit.var.name} on the assumable side of a clause", lineno)
            clauses[out.name].append((Clause(p_lits), Clause(a_lits)))
        else:
            raise ParseError(f"unknown keyword {keyword!r}", lineno)

    comps = []
    for name, var in variables.items():
        if var.assumable:
            continue
        inputs = tuple(variables[p] for p in parents.get(name, ()))
        comps.append(ComponentDescription(var, ordered(inputs), tuple(clauses.get(name, ()))))
    try:
        return build_ssd(list(variables.values()), comps)
    except ValidationError as exc:
        raise ParseError(str(exc)) from None


def _non_assumable(name: str, variables: dict[str, Variable], lineno: int) -> Variable:
    if name not in variables:
        raise ParseError(f"unknown variable {name!r}", lineno)
    var = variables[name]
    if var.assumable:
        raise ParseError(f"{name} is an assumable, expected a non-assumable", lineno)
    return var


def parse_observation(text: str, ssd: SSD) -> Instantiation:
    """Whitespace-separated literals over non-assumables; ``#`` comments allowed."""
    lits: list[Literal] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        for lit in parse_literals(line, ssd.by_name, lineno):
            if lit.var.assumable:
                raise ParseError(f"observation mentions assumable {lit.var.name}", lineno)
            lits.append(lit)
    try:
        return Instantiation(lits)
    except ValueError as exc:
        raise ParseError(f"inconsistent observation: {exc}") from None


def format_ssd(ssd: SSD) -> str:
    lines = []
    for v in ssd.variables:
        kw = "assumable" if v.assumable else "var"
        lines.append(f"{kw} {v.name}" if v.is_boolean else f"{kw} {v.name} {' '.join(v.domain)}")
    for c in ssd.components:
        if c.inputs:
            lines.append(f"component {c.output.name} : {' '.join(p.name for p in c.inputs)}")
    for c in ssd.components:
        for p, a in c.clauses:
            lines.append(f"clause {c.output.name} : {' '.join(map(str, p))} | {' '.join(map(str, a))}".rstrip())
    return "\n".join(lines) + "\n"


def format_observation(obs: Instantiation) -> str:
    return str(obs) + "\n" if len(obs) else "\n"


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    component: str | None
    message: str
    witness: str | None = None

    def __str__(self):
        where = f"[{self.component}] " if self.component else ""
        tail = f" (witness: {self.witness})" if self.witness else ""
        return f"{self.kind}: {where}{self.message}{tail}"


@dataclass
class ValidationReport:
    level: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return f"valid ({self.level})"
        return "\n".join(str(v) for v in self.violations)


def shared_assumables(ssd: SSD) -> dict[Variable, list[Variable]]:
    users = defaultdict(list)
    for c in ssd.components:
        for a in c.assumables:
            users[a].append(c.output)
    return {a: outs for a, outs in users.items() if len(outs) > 1}


def validate(ssd: SSD, level: str = "full", cap: int = DEFAULT_VALIDATION_CAP) -> ValidationReport:
    """Structural checks (acyclicity, scoping, assumable sharing); ``full`` adds local consistency."""
    if level not in ("structural", "full"):
        raise ValueError(f"unknown validation level {level!r}")
    report = ValidationReport(level)
    out = report.violations
    cycle = _find_cycle(ssd)
    if cycle:
        out.append(Violation("cycle", None, "structure is not acyclic", " -> ".join(v.name for v in cycle)))
    for c in ssd.components:
        if c.output in c.inputs:
            out.append(Violation("scope", c.output.name, "output is listed among its inputs"))
        ports = set(c.ports)
        for p, a in c.clauses:
            for lit in p.literals:
                if lit.var not in ports:
                    out.append(Violation("scope", c.output.name, f"clause mentions {lit.var.name}, which is not a port", str(p)))
            for lit in a.literals:
                if not lit.var.assumable:
                    out.append(Violation("scope", c.output.name, f"{lit.var.name} is not an assumable", str(a)))
    for a, outs in shared_assumables(ssd).items():
        out.append(Violation("sharing", None, f"shared assumable {a.name}", ", ".join(o.name for o in outs)))
    if level == "full":
        for c in ssd.components:
            witness = local_inconsistency(c, cap)
            if witness is not None:
                out.append(Violation(
                    "consistency", c.output.name,
                    "an instantiation of inputs and assumables has no consistent output value",
                    str(witness),
                ))
    return report


def local_inconsistency(c: ComponentDescription, cap: int = DEFAULT_VALIDATION_CAP) -> Instantiation | None:
    """First instantiation of inputs and assumables that no output value satisfies, if any."""
    scope = ordered(c.inputs + c.assumables)
    n = state_count(scope) * c.output.size
    if n > cap:
        raise CapExceededError(f"consistency check of {c.output.name}", n, cap)
    for combo in itertools.product(*(range(v.size) for v in scope)):
        values = dict(zip(scope, combo))
        ok = False
        for o in range(c.output.size):
            values[c.output] = o
            if all(p.satisfied_by(values) or a.satisfied_by(values) for p, a in c.clauses):
                ok = True
                break
        if not ok:
            return Instantiation(Literal(v, x) for v, x in zip(scope, combo))
    return None


# -- rewrites ---------------------------------------------------------------


def deshare_assumables(ssd: SSD) -> SSD:
    """Give each shared assumable its own auxiliary non-assumable that mirrors it."""
    shared = shared_assumables(ssd)
    if not shared:
        return ssd
    names = set(ssd.by_name)
    mirror: dict[Variable, Variable] = {}
    for a in ssd.assumables:
        if a not in shared:
            continue
        name = a.name + "'"
        while name in names:
            name += "'"
        names.add(name)
        mirror[a] = Variable(name, a.domain, False)

    comps = []
    for c in ssd.components:
        touched = [a for a in c.assumables if a in mirror]
        if not touched:
            comps.append(c)
            continue
        clauses = []
        for p, a in c.clauses:
            moved = [Literal(mirror[l.var], l.value) for l in a.literals if l.var in mirror]
            kept = [l for l in a.literals if l.var not in mirror]
            clauses.append((Clause(list(p.literals) + moved), Clause(kept)))
        comps.append(ComponentDescription(c.output, c.inputs + tuple(mirror[a] for a in touched), tuple(clauses)))
    for a, m in mirror.items():
        clauses = tuple(
            (Clause([Literal(m, v)]), Literal(a, v).negated_clause()) for v in range(a.size)
        )
        comps.append(ComponentDescription(m, (), clauses))
    return build_ssd(list(ssd.variables) + list(mirror.values()), comps)


def cut_arcs(ssd: SSD, obs: Instantiation) -> list[tuple[SSD, Instantiation]]:
    """Drop outgoing arcs of observed nodes, substitute their values, and split into pieces.

    Clauses satisfied by the observed value disappear; falsified literals are
    removed. A clause left with only an assumable part stays as a constraint on
    that component's health. Returns one ``(ssd, observation)`` pair per
    connected piece of the modified structure.
    """
    observed = obs.as_dict()
    comps = []
    for c in ssd.components:
        cut = [p for p in c.inputs if p in observed]
        if not cut:
            comps.append(c)
            continue
        clauses = []
        for p, a in c.clauses:
            if any(l.var in cut and observed[l.var] == l.value for l in p.literals):
                continue
            rest = Clause(l for l in p.literals if l.var not in cut)
            if not rest.literals and not a.literals:
                raise ValidationError(
                    f"observation {obs} falsifies a clause of {c.output.name} regardless of health"
                )
            clauses.append((rest, a))
        inputs = tuple(p for p in c.inputs if p not in observed)
        comps.append(ComponentDescription(c.output, inputs, tuple(clauses)))
    whole = SSD(ssd.variables, tuple(comps))

    pieces = []
    for piece in whole.connected_components():
        members = set(piece)
        piece_comps = [c for c in comps if c.output in members]
        health = {a for c in piece_comps for a in c.assumables}
        variables = [v for v in ssd.variables if v in members or v in health]
        sub = build_ssd(variables, piece_comps)
        # build_ssd renumbers variables; map the observation onto the new objects
        sub_obs = Instantiation(
            Literal(sub.by_name[l.var.name], l.value) for l in project(obs, members)
        )
        pieces.append((sub, sub_obs))
    return pieces
