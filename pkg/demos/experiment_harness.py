"""
Repeated runs, summaries and RDI
================================

The same flow as ``opsched run`` followed by ``opsched rdi``, done from
Python on three freshly generated instances.
"""

import tempfile
from pathlib import Path

from opsched import GeneratorParams, generate_instance, serialize_instance
from opsched.experiments import ExperimentSpec, compute_rdi, run_experiments, summarize, write_results

out = Path(tempfile.mkdtemp(prefix="opsched-demo-"))
paths = []
for seed in range(3):
    path = out / f"inst{seed}.json"
    path.write_text(serialize_instance(generate_instance(GeneratorParams(4, 4, 8, 4, 5, 2, seed=seed))))
    paths.append(str(path))

# %%
# An iteration budget makes the CSV identical from run to run.
spec = ExperimentSpec(tuple(paths), ("ils", "ts", "tsde", "de:variant=best1"), reps=3, iterations=300, threads=1)
rows = run_experiments(spec)
write_results(rows, out / "results.csv")
print((out / "results.csv").read_text())

summary = summarize(rows)
for s in summary:
    print(f"{s.instance:6s} {s.method:16s} best {s.best:4d} average {s.average:.1f}")

# %%
# RDI rescales each instance's averages to [0, 1] between the best and
# worst configuration, then averages over instances.
per, mean = compute_rdi({(s.method, s.instance): s.average for s in summary})
for cfg, v in sorted(mean.items(), key=lambda kv: kv[1]):
    print(f"{cfg:16s} mean RDI {v:.3f}")
