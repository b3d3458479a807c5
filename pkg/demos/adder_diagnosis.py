"""
Diagnosing a ripple-carry adder
===============================

Each full adder is five two-input gates, each with its own health bit.
All inputs and carries read low. Which gates are broken if some sum
bits read high?
"""

import time

import numpy as np

from ssdiag import build_jointree, compile_consequence, make_cardinality, minimal_diagnoses
from ssdiag.generators import adder_observation, ripple_adder
from ssdiag.jointree import stats
from ssdiag.oracle import brute_minimal

n = 3
ssd = ripple_adder(n)
print(len(ssd.non_assumables), "wires,", len(ssd.assumables), "gates")

jt = build_jointree(ssd)
st = stats(jt)
print("cliques", st.cliques, "width", st.width, "predicted cost", st.predicted_cost)

card = make_cardinality(ssd.assumables)

# only the lowest sum bit reads high
phi1 = adder_observation(ssd, n, [0])
out = compile_consequence(ssd, phi1)
print(minimal_diagnoses(ssd.assumables, out.graph, card).format())

# every sum bit reads high: one broken xor per bit, two candidates each
phi2 = adder_observation(ssd, n, range(n))
t0 = time.perf_counter()
out = compile_consequence(ssd, phi2)
found = minimal_diagnoses(ssd.assumables, out.graph, card)
elapsed = time.perf_counter() - t0
print(f"cost {found.cost}, {len(found.diagnoses)} diagnoses in {elapsed:.3f}s")
assert found == brute_minimal(ssd, phi2, card)

# which gates appear broken, across the minimal diagnoses
names = [v.name for v in ssd.assumables]
broken = np.array([[lit.value == 0 for lit in d] for d in found.diagnoses])
for name, count in zip(names, broken.sum(axis=0)):
    if count:
        print(f"{name:5s} broken in {count} of {len(found.diagnoses)}")

# graph size as the adder grows
for k in (1, 2, 3, 4, 5):
    s = ripple_adder(k)
    g = compile_consequence(s, adder_observation(s, k, range(k))).graph
    print(k, "bits:", g.node_count(), "nodes", g.edge_count(), "edges")
