"""Brute-force ground truth by direct enumeration.

Nothing here uses the jointree or the compiled graph. Diagnoses are computed
straight from the clause sets: an assumable instantiation is a diagnosis when
some completion of the observation over the unobserved non-assumables
satisfies every clause.

Enumeration is vectorized: the unobserved non-assumables and the assumables
are tabulated separately (each side limited by ``cap``), and rows of the
non-assumable table are grouped by which clauses their port side leaves
unsatisfied, so each group needs a single pass over the assumable table.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from .diagnose import CostFunction, DiagnosisResult
from .errors import CapExceededError, ValidationError
from .logic import Clause, Instantiation, Literal, Variable, assignment_table, instantiation_at, state_count
from .ssd import SSD

DEFAULT_ORACLE_CAP = 2**22
DEFAULT_IMPLICANT_CAP = 2**22


def _clause_truth(clause: Clause, columns: dict[Variable, np.ndarray], fixed: dict[Variable, int], rows: int) -> np.ndarray:
    out = np.zeros(rows, dtype=bool)
    for lit in clause.literals:
        if lit.var in fixed:
            if fixed[lit.var] == lit.value:
                out[:] = True
                return out
        else:
            out |= columns[lit.var] == lit.value
    return out


def diagnosis_mask(ssd: SSD, obs: Instantiation, cap: int = DEFAULT_ORACLE_CAP) -> tuple[tuple[Variable, ...], np.ndarray]:
    """Boolean mask over all assumable instantiations (row ``r`` has index ``r``) marking diagnoses."""
    for lit in obs:
        if lit.var.assumable or lit.var not in ssd.by_name.values():
            raise ValidationError(f"observation literal {lit} is not over the system's non-assumables")
    fixed = obs.as_dict()
    free = tuple(v for v in ssd.non_assumables if v not in fixed)
    assumables = ssd.assumables
    for what, side in (("unobserved non-assumables", free), ("assumables", assumables)):
        n = state_count(side)
        if n > cap:
            raise CapExceededError(f"oracle enumeration of {what}", n, cap)

    p_table = assignment_table(free)
    a_table = assignment_table(assumables)
    p_cols = {v: p_table[:, k] for k, v in enumerate(free)}
    a_cols = {v: a_table[:, k] for k, v in enumerate(assumables)}
    clauses = [pair for c in ssd.components for pair in c.clauses]

    if not clauses:
        return assumables, np.ones(len(a_table), dtype=bool)
    p_sat = np.stack([_clause_truth(p, p_cols, fixed, len(p_table)) for p, _ in clauses], axis=1)
    a_sat = np.stack([_clause_truth(a, a_cols, {}, len(a_table)) for _, a in clauses], axis=1)

    mask = np.zeros(len(a_table), dtype=bool)
    for pattern in np.unique(~p_sat, axis=0):
        need = np.flatnonzero(pattern)
        mask |= a_sat[:, need].all(axis=1) if len(need) else True
        if mask.all():
            break
    return assumables, mask


def _rows_to_instantiations(variables: Sequence[Variable], rows: Iterable[int]) -> set[Instantiation]:
    return {instantiation_at(variables, int(r)) for r in rows}


def brute_diagnoses(ssd: SSD, obs: Instantiation, cap: int = DEFAULT_ORACLE_CAP) -> set[Instantiation]:
    assumables, mask = diagnosis_mask(ssd, obs, cap)
    return _rows_to_instantiations(assumables, np.flatnonzero(mask))


def cost_vector(variables: Sequence[Variable], cf: CostFunction) -> np.ndarray:
    table = assignment_table(variables)
    total = np.zeros(len(table), dtype=np.int64)
    for k, var in enumerate(variables):
        per_value = np.array([cf(Literal(var, v)) for v in range(var.size)], dtype=np.int64)
        total += per_value[table[:, k]]
    return total


def brute_minimal(ssd: SSD, obs: Instantiation, cf: CostFunction, cap: int = DEFAULT_ORACLE_CAP) -> DiagnosisResult:
    assumables, mask = diagnosis_mask(ssd, obs, cap)
    if not mask.any():
        return DiagnosisResult(float("inf"), ())
    costs = cost_vector(assumables, cf)
    best = int(costs[mask].min())
    rows = np.flatnonzero(mask & (costs == best))
    return DiagnosisResult(best, tuple(sorted(_rows_to_instantiations(assumables, rows))))


# -- prime implicants and implicates -----------------------------------------


def _model_array(models: Iterable[Instantiation], variables: Sequence[Variable]) -> np.ndarray:
    arr = np.zeros(tuple(v.size for v in variables), dtype=bool)
    pos = {v: k for k, v in enumerate(variables)}
    for m in models:
        if set(m.variables) != set(variables):
            raise ValueError(f"model {m} is not a full instantiation of the given variables")
        idx = [0] * len(variables)
        for lit in m:
            idx[pos[lit.var]] = lit.value
        arr[tuple(idx)] = True
    return arr


def _check_size(variables: Sequence[Variable], options_per_var, cap: int, what: str):
    n = 1
    for v in variables:
        n *= options_per_var(v)
    if n > cap:
        raise CapExceededError(what, n, cap)


def prime_implicants(
    models: Iterable[Instantiation],
    variables: Sequence[Variable],
    cap: int = DEFAULT_IMPLICANT_CAP,
) -> set[Instantiation]:
    """Partial instantiations whose every completion is a model, minimal under literal removal.

    Each variable axis is widened to ``size + 1`` options: one per value, plus
    a final option meaning "unconstrained".
    """
    variables = tuple(variables)
    _check_size(variables, lambda v: v.size + 1, cap, "implicant table")
    full = _model_array(models, variables)
    for axis in range(len(variables)):
        full = np.concatenate([full, full.all(axis=axis, keepdims=True)], axis=axis)
    prime = full.copy()
    for axis, var in enumerate(variables):
        dropped = np.take(full, [var.size], axis=axis)
        constrained = [slice(None)] * len(variables)
        constrained[axis] = slice(0, var.size)
        prime[tuple(constrained)] &= ~np.broadcast_to(dropped, prime[tuple(constrained)].shape)
    out = set()
    for idx in zip(*np.nonzero(prime)):
        out.add(Instantiation(Literal(v, int(i)) for v, i in zip(variables, idx) if i < v.size))
    return out


def _value_subsets(var: Variable) -> list[frozenset[int]]:
    vals = range(var.size)
    return [frozenset(s) for r in range(1, var.size + 1) for s in itertools.combinations(vals, r)]


def prime_implicates(
    models: Iterable[Instantiation],
    variables: Sequence[Variable],
    cap: int = DEFAULT_IMPLICANT_CAP,
) -> set[Clause]:
    """Clauses satisfied by every model, minimal under literal removal.

    A clause is described by the region it excludes: for each variable a
    non-empty set of values that falsify it (the full domain when the variable
    does not occur). It is an implicate when no model lies in that region.
    """
    variables = tuple(variables)
    _check_size(variables, lambda v: 2**v.size - 1, cap, "implicate table")
    subsets = [_value_subsets(v) for v in variables]
    occupied = _model_array(models, variables)
    for axis, subs in enumerate(subsets):
        occupied = np.stack(
            [np.take(occupied, sorted(s), axis=axis).any(axis=axis) for s in subs], axis=axis
        )
    prime = ~occupied
    for axis, (var, subs) in enumerate(zip(variables, subsets)):
        where = {s: k for k, s in enumerate(subs)}
        for v in range(var.size):
            grown = np.array([where[s | {v}] for s in subs])
            has = np.array([v not in s for s in subs])
            shape = [1] * len(variables)
            shape[axis] = len(subs)
            # removing the literal V=v enlarges the excluded region by v
            weaker_is_implicate = ~np.take(occupied, grown, axis=axis)
            prime &= ~(weaker_is_implicate & has.reshape(shape))
    out = set()
    for idx in zip(*np.nonzero(prime)):
        lits = []
        for var, subs, k in zip(variables, subsets, idx):
            excluded = subs[k]
            lits += [Literal(var, v) for v in range(var.size) if v not in excluded]
        out.add(Clause(lits))
    return out


def models_of_terms(terms: Iterable[Instantiation], variables: Sequence[Variable]) -> set[Instantiation]:
    """Full instantiations of ``variables`` entailing at least one of ``terms``."""
    out = set()
    for r in range(state_count(variables)):
        inst = instantiation_at(variables, r)
        if any(t.consistent_with(inst) for t in terms):
            out.add(inst)
    return out


def models_of_clauses(clauses: Iterable[Clause], variables: Sequence[Variable]) -> set[Instantiation]:
    clauses = list(clauses)
    out = set()
    for r in range(state_count(variables)):
        inst = instantiation_at(variables, r)
        values = inst.as_dict()
        if all(c.satisfied_by(values) for c in clauses):
            out.add(inst)
    return out
