"""Multivalued propositional substrate.

Variables carry an ordered domain of value names; internally a value is its
index in that domain. A binary variable is simply one whose domain has two
values. Instantiations are kept sorted by the global variable order (the
``order`` field, which SSD parsing sets from declaration order).

Mixed-radix indexing puts the *first* variable of a sequence in the least
significant digit: ``index([A, B, D])`` with ``A=1, B=0, D=1`` is
``1 + 2 * (0 + 2 * 1) = 5``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import AssignmentError, ParseError

BINARY_DOMAIN = ("0", "1")


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[str, ...] = BINARY_DOMAIN
    assumable: bool = False
    order: int = field(default=0, compare=False)

    def __post_init__(self):
        if len(self.domain) < 2:
            raise ValueError(f"variable {self.name!r} needs at least two values")
        if len(set(self.domain)) != len(self.domain):
            raise ValueError(f"variable {self.name!r} has repeated values")

    @property
    def size(self) -> int:
        return len(self.domain)

    @property
    def is_boolean(self) -> bool:
        """True for the default ``0 1`` domain, which supports ``x`` / ``!x`` shorthand."""
        return self.domain == BINARY_DOMAIN

    @property
    def healthy(self) -> int:
        """Index of the nominal value: ``1`` for boolean variables, else the first listed."""
        return 1 if self.is_boolean else 0

    def value_index(self, value_name: str) -> int:
        try:
            return self.domain.index(value_name)
        except ValueError:
            raise ValueError(f"{value_name!r} is not a value of {self.name}") from None

    def __repr__(self):
        return f"Variable({self.name!r})"


def sort_key(var: Variable) -> tuple[int, str]:
    return (var.order, var.name)


def ordered(variables: Iterable[Variable]) -> tuple[Variable, ...]:
    """Distinct variables in canonical order."""
    return tuple(sorted(set(variables), key=sort_key))


@dataclass(frozen=True)
class Literal:
    var: Variable
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.var.size:
            raise ValueError(f"value {self.value} out of range for {self.var.name}")

    def negated_clause(self) -> Clause:
        """The clause of all other values; a plain negated literal when binary."""
        return Clause(Literal(self.var, v) for v in range(self.var.size) if v != self.value)

    def __str__(self):
        if self.var.is_boolean:
            return self.var.name if self.value else f"!{self.var.name}"
        return f"{self.var.name}={self.var.domain[self.value]}"

    def __repr__(self):
        return f"Literal({self})"


def _lit_key(lit: Literal):
    return (lit.var.order, lit.var.name, lit.value)


def parse_literal(token: str, variables: Mapping[str, Variable]) -> Literal:
    """Parse ``name``, ``!name`` or ``name=value`` against known variables."""
    if "=" in token:
        name, _, value_name = token.partition("=")
        var = _lookup(name, variables)
        return Literal(var, var.value_index(value_name))
    negative = token.startswith("!")
    name = token[1:] if negative else token
    var = _lookup(name, variables)
    if not var.is_boolean:
        raise ValueError(f"{name} has named values; write {name}=<value>")
    return Literal(var, 0 if negative else 1)


def _lookup(name: str, variables: Mapping[str, Variable]) -> Variable:
    try:
        return variables[name]
    except KeyError:
        raise ValueError(f"unknown variable {name!r}") from None


class Instantiation(Sequence[Literal]):
    """A consistent conjunction of literals, at most one per variable, canonically sorted."""

    __slots__ = ("_lits", "_map", "_hash")

    def __init__(self, literals: Iterable[Literal] = ()):
        values: dict[Variable, int] = {}
        for lit in literals:
            prev = values.setdefault(lit.var, lit.value)
            if prev != lit.value:
                raise ValueError(f"{lit.var.name} assigned both {prev} and {lit.value}")
        self._lits = tuple(sorted((Literal(v, x) for v, x in values.items()), key=_lit_key))
        self._map = values
        self._hash = hash(self._lits)

    @classmethod
    def from_values(cls, values: Mapping[Variable, int]) -> Instantiation:
        return cls(Literal(v, x) for v, x in values.items())

    def __getitem__(self, i):
        return self._lits[i]

    def __len__(self):
        return len(self._lits)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self._lits)

    def __contains__(self, lit) -> bool:
        return isinstance(lit, Literal) and self._map.get(lit.var) == lit.value

    def __eq__(self, other):
        return isinstance(other, Instantiation) and self._lits == other._lits

    def __hash__(self):
        return self._hash

    def __lt__(self, other: Instantiation):
        return [_lit_key(x) for x in self._lits] < [_lit_key(x) for x in other._lits]

    @property
    def variables(self) -> tuple[Variable, ...]:
        return tuple(lit.var for lit in self._lits)

    def value(self, var: Variable) -> int | None:
        return self._map.get(var)

    def as_dict(self) -> dict[Variable, int]:
        return dict(self._map)

    def union(self, other: Iterable[Literal]) -> Instantiation:
        return Instantiation(itertools.chain(self._lits, other))

    def consistent_with(self, other: Instantiation) -> bool:
        return all(other._map.get(v, x) == x for v, x in self._map.items())

    def __str__(self):
        return " ".join(str(lit) for lit in self._lits) if self._lits else "true"

    def __repr__(self):
        return f"Instantiation({self})"


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals. The empty clause is ``false``."""

    literals: frozenset[Literal]

    def __init__(self, literals: Iterable[Literal] = ()):
        object.__setattr__(self, "literals", frozenset(literals))

    @property
    def variables(self) -> tuple[Variable, ...]:
        return ordered(lit.var for lit in self.literals)

    def satisfied_by(self, values: Mapping[Variable, int]) -> bool:
        return any(values.get(lit.var) == lit.value for lit in self.literals)

    def falsified_by(self, values: Mapping[Variable, int]) -> bool:
        """True when every literal's variable is assigned some other value."""
        return all(lit.var in values and values[lit.var] != lit.value for lit in self.literals)

    def __iter__(self):
        return iter(sorted(self.literals, key=_lit_key))

    def __len__(self):
        return len(self.literals)

    def __str__(self):
        return " | ".join(str(lit) for lit in self) if self.literals else "false"


def project(target, variables: Iterable[Variable]):
    """Keep only the literals whose variable is in ``variables``."""
    keep = set(variables)
    if isinstance(target, Instantiation):
        return Instantiation(lit for lit in target if lit.var in keep)
    if isinstance(target, Clause):
        return Clause(lit for lit in target.literals if lit.var in keep)
    raise TypeError(f"cannot project {type(target).__name__}")


class AssignmentEnv:
    """Mutable variable assignment with exact assert/retract pairs."""

    def __init__(self):
        self._values: dict[Variable, int] = {}

    def assert_(self, inst: Iterable[Literal]) -> None:
        lits = list(inst)
        for lit in lits:
            if lit.var in self._values:
                raise AssignmentError(f"{lit.var.name} is already assigned")
        for lit in lits:
            self._values[lit.var] = lit.value

    def retract(self, inst: Iterable[Literal]) -> None:
        lits = list(inst)
        for lit in lits:
            if self._values.get(lit.var) != lit.value:
                raise AssignmentError(f"{lit} was not asserted")
        for lit in lits:
            del self._values[lit.var]

    def value_of(self, var: Variable) -> int:
        try:
            return self._values[var]
        except KeyError:
            raise AssignmentError(f"{var.name} is not instantiated") from None

    def is_instantiated(self, var: Variable) -> bool:
        return var in self._values

    def snapshot(self) -> dict[Variable, int]:
        return dict(self._values)

    def __len__(self):
        return len(self._values)


def index_of(variables: Sequence[Variable], values: Mapping[Variable, int]) -> int:
    """Mixed-radix index of ``values`` restricted to ``variables`` (first = least significant)."""
    i = 0
    stride = 1
    for var in variables:
        try:
            i += values[var] * stride
        except KeyError:
            raise AssignmentError(f"{var.name} is not instantiated") from None
        stride *= var.size
    return i


def index(variables: Sequence[Variable], env: AssignmentEnv) -> int:
    i = 0
    stride = 1
    for var in variables:
        i += env.value_of(var) * stride
        stride *= var.size
    return i


def state_count(variables: Iterable[Variable]) -> int:
    n = 1
    for var in variables:
        n *= var.size
    return n


def generate_instantiations(variables: Sequence[Variable], env: AssignmentEnv) -> list[Instantiation]:
    """Every instantiation of the unassigned variables, in increasing index order."""
    free = [v for v in variables if not env.is_instantiated(v)]
    out = []
    # product() varies its last argument fastest, so feed it reversed
    for combo in itertools.product(*(range(v.size) for v in reversed(free))):
        out.append(Instantiation(Literal(v, x) for v, x in zip(reversed(free), combo)))
    return out


def instantiation_at(variables: Sequence[Variable], i: int) -> Instantiation:
    """Inverse of :func:`index_of`."""
    lits = []
    for var in variables:
        i, x = divmod(i, var.size)
        lits.append(Literal(var, x))
    return Instantiation(lits)


def assignment_table(variables: Sequence[Variable]) -> np.ndarray:
    """All instantiations of ``variables`` as rows of value indices, row ``r`` having index ``r``."""
    n = state_count(variables)
    rows = np.arange(n, dtype=np.int64)
    table = np.empty((n, len(variables)), dtype=np.int8)
    stride = 1
    for k, var in enumerate(variables):
        table[:, k] = (rows // stride) % var.size
        stride *= var.size
    return table


def parse_literals(text: str, variables: Mapping[str, Variable], line: int | None = None) -> list[Literal]:
    out = []
    for token in text.split():
        try:
            out.append(parse_literal(token, variables))
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
    return out
