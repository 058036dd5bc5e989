"""
Decoding a random-key genotype
==============================

A 16-operation, two-job instance on four machines with two fixed
operations. We decode a hand-picked genotype into a machine assignment,
an execution order and a full schedule, then look at its critical path.
"""

import numpy as np

from opsched import FixedAssignment, Instance, OperationSpec, evaluate
from opsched.decoder import schedule_csv
from opsched.encoding import decode
from opsched.graph import build_digraph

# Precedences of the two jobs: ops 1..9 and 10..16.
arcs = (
    (1, 2), (2, 3), (2, 4), (2, 5), (3, 6), (5, 7), (6, 8), (7, 9),
    (10, 15), (11, 13), (12, 14), (13, 15), (14, 15), (15, 16),
)
eligible = {
    2: (1, 2), 3: (3, 4), 4: (2, 4), 5: (2, 4), 6: (1, 2), 7: (1, 3), 8: (3, 4),
    9: (1, 2), 10: (3, 4), 12: (1, 3), 13: (1, 3), 14: (1, 2), 15: (2, 4), 16: (1, 3),
}

# %%
# Processing times are made up: op id mod 7 plus the machine number.
# Ops 1 and 11 are fixed, so the genotype only covers the other 14.
ops = []
for i in range(1, 17):
    if i == 1:
        machines = {3: 4}
    elif i == 11:
        machines = {2: 5}
    else:
        machines = {k: i % 7 + k for k in eligible[i]}
    ops.append(OperationSpec(1 if i <= 9 else 2, machines))
fixed = (FixedAssignment(1, 3, 40), FixedAssignment(11, 2, 60))
inst = Instance(2, 4, tuple(ops), arcs, (), None, fixed)
print(f"o={inst.o}, non-fixed={len(inst.nonfixed)}")

# %%
# First half of x picks a machine per op, second half ranks the ops.
pi = [0.05, 0.79, 0.48, 0.26, 0.17, 0.53, 0.99, 0.09, 0.95, 0.63, 0.52, 0.02, 0.31, 0.62]
sigma = [0.05, 0.55, 0.95, 0.51, 0.75, 0.54, 0.00, 0.99, 0.15, 0.15, 0.16, 0.11, 0.79, 0.55]
x = np.array(pi + sigma)

asg, seq = decode(x, inst)
print("machines:", {i: asg.kappa[i] for i in inst.nonfixed})
print("order:   ", seq.sigma)
for k, phi in enumerate(seq.phi, start=1):
    print(f"machine {k}: {phi}")

# %%
# The full schedule slots the fixed operations into the machine sequences.
sched = evaluate(x, inst)
print(schedule_csv(sched))
print("makespan", sched.cmax)

# %%
# The longest path of the solution digraph has weight equal to the makespan.
g = build_digraph(inst, sched)
print("critical path:", g.path)
print("tails:", {i: g.t[i] for i in g.path[1:-1]})
