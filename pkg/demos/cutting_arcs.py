"""
Cutting arcs out of observed nodes
==================================

Once a node is observed, its children no longer need to agree with it
through the structure: the observed value can be pushed into their
descriptions and the arcs dropped. The structure can fall apart into
tree-shaped pieces.
"""

import random

import numpy as np

from ssdiag import build_jointree, compile_consequence, cut_arcs
from ssdiag.generators import random_observation, random_ssd, three_gate_circuit
from ssdiag.jointree import stats
from ssdiag.logic import Instantiation, Literal
from ssdiag.ssd import format_ssd

ssd = three_gate_circuit()
A, E = ssd.by_name["A"], ssd.by_name["E"]
obs = Instantiation([Literal(A, 0), Literal(E, 0)])

print("before:", "tree" if ssd.is_tree() else "has an undirected cycle", "width", build_jointree(ssd).width)
for piece, piece_obs in cut_arcs(ssd, obs):
    print("--- piece, observation:", piece_obs or "true")
    print(format_ssd(piece), end="")
    print("tree" if piece.is_tree() else "not a tree", "width", build_jointree(piece).width)

whole = compile_consequence(ssd, obs).graph
split = compile_consequence(ssd, obs, cut=True).graph
print("same diagnoses:", whole.equivalent(split, ssd.assumables))

# predicted work with and without cutting, on random circuits
rows = []
for seed in range(100):
    rng = random.Random(seed)
    s = random_ssd(rng)
    o = random_observation(s, rng)
    seen = set(o.variables)
    before = stats(build_jointree(s), seen).predicted_cost
    after = sum(stats(build_jointree(p), set(po.variables)).predicted_cost for p, po in cut_arcs(s, o))
    rows.append((before, after))
rows = np.array(rows)
print("median predicted cost before/after:", np.median(rows, axis=0))
print("circuits that got cheaper:", int((rows[:, 1] < rows[:, 0]).sum()), "of", len(rows))
