"""
Five metaheuristics on one instance
===================================

Runs DE, GA, ILS, TS and the TS+DE hybrid with the same decode budget, so
the numbers are reproducible on any machine.
"""

from opsched import GeneratorParams, SolverParams, generate_instance, solve

inst = generate_instance(GeneratorParams(8, 5, 12, 6, 8, 3, seed=2024))
print(f"n={inst.n} o={inst.o} m={inst.m}")

budget = 2000
for method in ("DE", "GA", "ILS", "TS", "TSDE"):
    res = solve(inst, SolverParams(method=method, max_evals=budget, seed=1))
    first = res.history[0][2]
    print(f"{method:5s} first {first:5d}  final {res.makespan:5d}  "
          f"improvements {len(res.history):3d}  {res.seconds:.1f}s")

# %%
# Parameters follow the method's defaults unless overridden.
p = SolverParams(method="DE", variant="best1", zeta=0.5, max_evals=budget, seed=1).resolve(inst)
print(p)
print("DE best/1:", solve(inst, p).makespan)
