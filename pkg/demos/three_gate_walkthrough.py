"""
Three gates, one observation
============================

An inverter, an or-gate and an and-gate wired as C = not A, D = A or B,
E = C and D. We see A high and E high, which a healthy circuit cannot do.
"""

import numpy as np

from ssdiag import compile_consequence, make_cardinality, minimal_diagnoses, parse_jointree
from ssdiag.generators import THREE_GATE_JOINTREE, three_gate_circuit
from ssdiag.logic import Instantiation, Literal
from ssdiag.oracle import brute_diagnoses, diagnosis_mask
from ssdiag.ssd import format_ssd

ssd = three_gate_circuit()
print(format_ssd(ssd))

# the observation A & E
A, E = ssd.by_name["A"], ssd.by_name["E"]
obs = Instantiation([Literal(A, 1), Literal(E, 1)])

# hand-written jointree: C1 = {A, C, D} sits between {A, B, D} and {C, D, E}
jt, assigned = parse_jointree(THREE_GATE_JOINTREE, ssd)
for cid, clique in zip(jt.ids, jt.cliques):
    print(cid, " ".join(v.name for v in clique))

out = compile_consequence(ssd, obs, jt, assigned, pivot=jt.clique_index("C1"))
g = out.graph
print(out.report())
print("decomposable:", g.is_decomposable())

# models of the compiled sentence, one per health state
models = sorted(str(m) for m in g.enumerate_models(ssd.assumables))
print(len(models), "diagnoses")
for m in models:
    print("  ", m)

# the same set by brute force, as a boolean vector over the 8 health states
variables, mask = diagnosis_mask(ssd, obs)
print([v.name for v in variables], mask.astype(int))
assert g.enumerate_models(ssd.assumables) == brute_diagnoses(ssd, obs)

# constant folding shrinks the graph a lot
small = g.simplified()
print("nodes", g.node_count(), "->", small.node_count())

# cheapest explanations: one broken gate, either the inverter or the and-gate
best = minimal_diagnoses(ssd.assumables, g, make_cardinality(ssd.assumables))
print(best.format())

# count how many faults each diagnosis needs
faults = np.array([str(m).count("!") for m in models])
print("faults per diagnosis:", np.bincount(faults))
