"""Arena-backed NNF graphs.

Nodes are integer ids into parallel lists. ``true`` is an and-node with no
children and ``false`` an or-node with no children. Structure sharing is
expected: several parents may point to one child, and node identity is the id,
never a structural hash.

Text format, one node per line, children defined before parents, root last::

    nnf <node-count> <edge-count> <var-count>
    L <var-name> <value-index>
    A <child-count> <id> ...
    O <child-count> <id> ...
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapExceededError, CycleError, NotDecomposableError, ParseError
from .logic import (
    Instantiation,
    Literal,
    Variable,
    assignment_table,
    ordered,
    state_count,
)

LITERAL = "L"
AND = "A"
OR = "O"

DEFAULT_MODEL_CAP = 2**20


class NnfGraph:
    def __init__(self):
        self._kind: list[str] = []
        self._children: list[list[int]] = []
        self._literal: list[Literal | None] = []
        self._parents: list[int] = []
        self.root: int | None = None
        self._frozen = False
        self._atoms: dict[int, frozenset[Variable]] = {}

    # -- construction -------------------------------------------------------

    def _new(self, kind: str, literal: Literal | None = None) -> int:
        self._check_mutable()
        self._kind.append(kind)
        self._children.append([])
        self._literal.append(literal)
        self._parents.append(0)
        return len(self._kind) - 1

    def new_literal_node(self, var: Variable, value: int) -> int:
        return self._new(LITERAL, Literal(var, value))

    def new_and_node(self) -> int:
        return self._new(AND)

    def new_or_node(self) -> int:
        return self._new(OR)

    def add_child(self, parent: int, child: int) -> None:
        self._check_mutable()
        if self._kind[parent] == LITERAL:
            raise ValueError("literal nodes cannot have children")
        if not 0 <= child < len(self._kind):
            raise IndexError(f"no node {child}")
        if child == parent:
            raise CycleError("a node cannot be its own child")
        # a parentless node cannot be reached from anywhere, so no cycle is possible
        if self._parents[parent] and self._reaches(child, parent):
            raise CycleError(f"adding {child} under {parent} would create a cycle")
        self._children[parent].append(child)
        self._parents[child] += 1
        self._atoms.clear()

    def _reaches(self, src: int, dst: int) -> bool:
        seen = {src}
        stack = [src]
        while stack:
            n = stack.pop()
            if n == dst:
                return True
            for c in self._children[n]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def freeze(self) -> NnfGraph:
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _check_mutable(self):
        if self._frozen:
            raise RuntimeError("graph is frozen")

    # -- inspection ---------------------------------------------------------

    def __len__(self):
        return len(self._kind)

    def kind(self, node: int) -> str:
        return self._kind[node]

    def children(self, node: int) -> tuple[int, ...]:
        return tuple(self._children[node])

    def literal_of(self, node: int) -> Literal:
        lit = self._literal[node]
        if lit is None:
            raise ValueError(f"node {node} is not a literal node")
        return lit

    def is_literal(self, node: int) -> bool:
        return self._kind[node] == LITERAL

    def is_and(self, node: int) -> bool:
        return self._kind[node] == AND

    def is_or(self, node: int) -> bool:
        return self._kind[node] == OR

    def is_true(self, node: int) -> bool:
        return self._kind[node] == AND and not self._children[node]

    def is_false(self, node: int) -> bool:
        return self._kind[node] == OR and not self._children[node]

    def _root(self, node: int | None) -> int:
        node = self.root if node is None else node
        if node is None:
            raise ValueError("graph has no root")
        return node

    def postorder(self, node: int | None = None) -> list[int]:
        """Nodes reachable from ``node`` (default root), children before parents."""
        start = self._root(node)
        out: list[int] = []
        done: set[int] = set()
        stack: list[tuple[int, int]] = [(start, 0)]
        on_stack = {start}
        while stack:
            n, i = stack[-1]
            kids = self._children[n]
            if i < len(kids):
                stack[-1] = (n, i + 1)
                c = kids[i]
                if c not in done and c not in on_stack:
                    on_stack.add(c)
                    stack.append((c, 0))
            else:
                stack.pop()
                on_stack.discard(n)
                done.add(n)
                out.append(n)
        return out

    def node_count(self, node: int | None = None) -> int:
        return len(self.postorder(node))

    def edge_count(self, node: int | None = None) -> int:
        return sum(len(self._children[n]) for n in self.postorder(node))

    def atoms_of(self, node: int | None = None) -> frozenset[Variable]:
        node = self._root(node)
        if node in self._atoms:
            return self._atoms[node]
        for n in self.postorder(node):
            if n in self._atoms:
                continue
            if self._kind[n] == LITERAL:
                self._atoms[n] = frozenset((self._literal[n].var,))
            else:
                acc: set[Variable] = set()
                for c in self._children[n]:
                    acc |= self._atoms[c]
                self._atoms[n] = frozenset(acc)
        return self._atoms[node]

    def is_decomposable(self, node: int | None = None) -> bool:
        return self._decomposition_witness(node) is None

    def _decomposition_witness(self, node: int | None):
        for n in self.postorder(node):
            if self._kind[n] != AND:
                continue
            seen: set[Variable] = set()
            for c in self._children[n]:
                atoms = self.atoms_of(c)
                shared = seen & atoms
                if shared:
                    return n, shared
                seen |= atoms
        return None

    # -- semantics ----------------------------------------------------------

    def satisfiable(self, node: int | None = None) -> bool:
        """Linear-time satisfiability; only sound on decomposable graphs."""
        witness = self._decomposition_witness(node)
        if witness is not None:
            n, shared = witness
            names = ", ".join(sorted(v.name for v in shared))
            raise NotDecomposableError(f"and-node {n} has conjuncts sharing {names}")
        sat: dict[int, bool] = {}
        for n in self.postorder(node):
            kind = self._kind[n]
            if kind == LITERAL:
                sat[n] = True
            elif kind == AND:
                sat[n] = all(sat[c] for c in self._children[n])
            else:
                sat[n] = any(sat[c] for c in self._children[n])
        return sat[self._root(node)]

    def evaluate(self, assignment: Instantiation | Mapping[Variable, int], node: int | None = None) -> bool:
        values = assignment.as_dict() if isinstance(assignment, Instantiation) else assignment
        val: dict[int, bool] = {}
        for n in self.postorder(node):
            kind = self._kind[n]
            if kind == LITERAL:
                lit = self._literal[n]
                if lit.var not in values:
                    raise ValueError(f"assignment does not cover {lit.var.name}")
                val[n] = values[lit.var] == lit.value
            elif kind == AND:
                val[n] = all(val[c] for c in self._children[n])
            else:
                val[n] = any(val[c] for c in self._children[n])
        return val[self._root(node)]

    def evaluate_table(self, variables: Sequence[Variable], table: np.ndarray, node: int | None = None) -> np.ndarray:
        """Vectorised evaluation: one boolean per row of ``table`` (columns follow ``variables``)."""
        column = {v: k for k, v in enumerate(variables)}
        rows = table.shape[0]
        val: dict[int, np.ndarray] = {}
        for n in self.postorder(node):
            kind = self._kind[n]
            if kind == LITERAL:
                lit = self._literal[n]
                if lit.var not in column:
                    raise ValueError(f"table does not cover {lit.var.name}")
                val[n] = table[:, column[lit.var]] == lit.value
            elif kind == AND:
                acc = np.ones(rows, dtype=bool)
                for c in self._children[n]:
                    acc &= val[c]
                val[n] = acc
            else:
                acc = np.zeros(rows, dtype=bool)
                for c in self._children[n]:
                    acc |= val[c]
                val[n] = acc
        return val[self._root(node)]

    def model_mask(self, variables: Sequence[Variable], cap: int = DEFAULT_MODEL_CAP, node: int | None = None) -> np.ndarray:
        """Boolean mask over all instantiations of ``variables`` in index order."""
        variables = list(variables)
        missing = self.atoms_of(node) - set(variables)
        if missing:
            raise ValueError("variables do not cover " + ", ".join(sorted(v.name for v in missing)))
        n = state_count(variables)
        if n > cap:
            raise CapExceededError("model enumeration", n, cap)
        return self.evaluate_table(variables, assignment_table(variables), node)

    def enumerate_models(self, variables: Iterable[Variable], cap: int = DEFAULT_MODEL_CAP, node: int | None = None) -> set[Instantiation]:
        variables = ordered(variables)
        mask = self.model_mask(variables, cap, node)
        table = assignment_table(variables)
        return {
            Instantiation(Literal(v, int(x)) for v, x in zip(variables, row))
            for row in table[mask]
        }

    def equivalent(self, other: NnfGraph, variables: Iterable[Variable], cap: int = DEFAULT_MODEL_CAP) -> bool:
        variables = ordered(variables)
        return bool(np.array_equal(self.model_mask(variables, cap), other.model_mask(variables, cap)))

    # -- copying and rewriting ---------------------------------------------

    def copy_into(self, target: NnfGraph, node: int | None = None, memo: dict[int, int] | None = None) -> int:
        """Copy the subgraph at ``node`` into ``target``, preserving sharing. Returns the new id."""
        memo = {} if memo is None else memo
        for n in self.postorder(node):
            if n in memo:
                continue
            kind = self._kind[n]
            if kind == LITERAL:
                lit = self._literal[n]
                m = target.new_literal_node(lit.var, lit.value)
            else:
                m = target.new_and_node() if kind == AND else target.new_or_node()
                for c in self._children[n]:
                    target.add_child(m, memo[c])
            memo[n] = m
        return memo[self._root(node)]

    def simplified(self) -> NnfGraph:
        """Equivalent graph with constant children folded away and single-child gates collapsed."""
        out = NnfGraph()
        true = out.new_and_node()
        false = out.new_or_node()
        new: dict[int, int] = {}
        for n in self.postorder():
            kind = self._kind[n]
            if kind == LITERAL:
                lit = self._literal[n]
                new[n] = out.new_literal_node(lit.var, lit.value)
                continue
            kids = [new[c] for c in self._children[n]]
            absorbing, neutral = (false, true) if kind == AND else (true, false)
            if absorbing in kids:
                new[n] = absorbing
                continue
            kids = [c for c in kids if c != neutral]
            if not kids:
                new[n] = neutral
            elif len(kids) == 1:
                new[n] = kids[0]
            else:
                m = out.new_and_node() if kind == AND else out.new_or_node()
                for c in kids:
                    out.add_child(m, c)
                new[n] = m
        out.root = new[self._root(None)]
        return out.compacted()

    def compacted(self) -> NnfGraph:
        """Copy holding only nodes reachable from the root."""
        out = NnfGraph()
        out.root = self.copy_into(out)
        return out

    # -- text format --------------------------------------------------------

    def serialize(self) -> str:
        order = self.postorder()
        ids = {n: i for i, n in enumerate(order)}
        lines = []
        edges = 0
        names: set[str] = set()
        for n in order:
            kind = self._kind[n]
            if kind == LITERAL:
                lit = self._literal[n]
                names.add(lit.var.name)
                lines.append(f"L {lit.var.name} {lit.value}")
            else:
                kids = self._children[n]
                edges += len(kids)
                lines.append(" ".join([kind, str(len(kids))] + [str(ids[c]) for c in kids]))
        header = f"nnf {len(order)} {edges} {len(names)}"
        return "\n".join([header] + lines) + "\n"


def parse_nnf(text: str, variables: Mapping[str, Variable] | Iterable[Variable] | None = None) -> NnfGraph:
    """Parse the text format. Unknown variable names become boolean variables when ``variables`` is None."""
    if variables is not None and not isinstance(variables, Mapping):
        variables = {v.name: v for v in variables}
    created: dict[str, Variable] = {}
    g = NnfGraph()
    header = None
    edges = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        tokens = raw.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if header is None:
            if tokens[0] != "nnf" or len(tokens) != 4:
                raise ParseError("expected header 'nnf <nodes> <edges> <vars>'", lineno)
            try:
                header = tuple(int(t) for t in tokens[1:])
            except ValueError:
                raise ParseError("header counts must be integers", lineno) from None
            continue
        kind = tokens[0]
        if kind == LITERAL:
            if len(tokens) != 3:
                raise ParseError("literal line needs a name and a value index", lineno)
            name = tokens[1]
            try:
                value = int(tokens[2])
            except ValueError:
                raise ParseError(f"bad value index {tokens[2]!r}", lineno) from None
            if variables is not None:
                if name not in variables:
                    raise ParseError(f"unknown variable {name!r}", lineno)
                var = variables[name]
            else:
                var = created.get(name)
                if var is None:
                    var = created[name] = Variable(name, order=len(created))
            if not 0 <= value < var.size:
                raise ParseError(f"value {value} out of range for {name}", lineno)
            g.new_literal_node(var, value)
        elif kind in (AND, OR):
            try:
                count = int(tokens[1])
                kids = [int(t) for t in tokens[2:]]
            except (IndexError, ValueError):
                raise ParseError("gate line needs integer child count and ids", lineno) from None
            if count != len(kids):
                raise ParseError(f"declared {count} children, found {len(kids)}", lineno)
            node = g.new_and_node() if kind == AND else g.new_or_node()
            for c in kids:
                if not 0 <= c < node:
                    raise ParseError(f"child {c} is not defined before node {node}", lineno)
                g.add_child(node, c)
            edges += count
        else:
            raise ParseError(f"unknown node type {kind!r}", lineno)
    if header is None or len(g) == 0:
        raise ParseError("empty graph")
    if header[0] != len(g) or header[1] != edges:
        raise ParseError(f"header says {header[0]} nodes/{header[1]} edges, found {len(g)}/{edges}")
    g.root = len(g) - 1
    return g


def conjoin(graphs: Sequence[NnfGraph]) -> NnfGraph:
    """A new graph whose root is an and-node over copies of the given roots."""
    if len(graphs) == 1:
        return graphs[0].compacted()
    out = NnfGraph()
    roots = [g.copy_into(out) for g in graphs]
    top = out.new_and_node()
    for r in roots:
        out.add_child(top, r)
    out.root = top
    return out


def from_dnf(terms: Sequence[Sequence[Literal]], graph: NnfGraph | None = None) -> tuple[NnfGraph, int]:
    """Build a DNF as an NNF subgraph; a DNF is decomposable as long as each term mentions a variable once."""
    g = NnfGraph() if graph is None else graph

    def term_node(term):
        if len(term) == 1:
            return g.new_literal_node(term[0].var, term[0].value)
        conj = g.new_and_node()
        for lit in term:
            g.add_child(conj, g.new_literal_node(lit.var, lit.value))
        return conj

    if len(terms) == 1:
        node = term_node(terms[0])
    else:
        node = g.new_or_node()
        for term in terms:
            g.add_child(node, term_node(term))
    return g, node
