"""
Steepest descent on a small instance
====================================

Generate a small instance, decode a random genotype and let the local
search reallocate critical operations until no estimated move improves.
"""

import numpy as np

from opsched import GeneratorParams, evaluate, generate_instance
from opsched.local_search import local_search

inst = generate_instance(GeneratorParams(3, 4, 6, 3, 4, 2, seed=11))
print(f"n={inst.n} o={inst.o} m={inst.m} fixed={len(inst.fixed)}")

rng = np.random.default_rng(0)
x = rng.random(2 * len(inst.nonfixed))
print("random genotype makespan:", evaluate(x, inst).cmax)

# %%
# Each trace row is (step, move, estimate, decoded makespan). The last
# row may be the rejected neighbor that ended the search.
trace = []
x2, best = local_search(x, inst, trace=trace)
for step, move, estimate, cmax in trace:
    print(f"step {step}: op {move.op} -> machine {move.machine} slot {move.position}, "
          f"estimate {estimate}, makespan {cmax}")
print("local optimum:", best.cmax)

# %%
# Repeating from many random starts shows how much the start matters.
ends = [local_search(rng.random(len(x)), inst)[1].cmax for _ in range(50)]
print("50 descents: best", min(ends), "mean", np.mean(ends), "worst", max(ends))
