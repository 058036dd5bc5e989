"""Repeated solver runs over instance files, CSV tables, RDI and RE."""

from __future__ import annotations

import csv
import glob
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache
from pathlib import Path
from statistics import fmean

from .instance import load_instance
from .metaheuristics import METHODS, SolverParams, solve

RESULT_HEADER = ["instance", "method", "run", "seed", "makespan", "seconds", "iterations"]
SUMMARY_HEADER = ["instance", "method", "runs", "best", "average"]
_PARAM_TYPES = {f.name: f.type for f in fields(SolverParams)}


def parse_method(label: str) -> tuple[str, dict]:
    """``"de"`` or ``"de:zeta=0.5:n_size=12"`` -> method name and parameter overrides."""
    name, *opts = label.split(":")
    method = name.upper()
    if method not in METHODS:
        raise ValueError(f"unknown method {name!r}; expected one of {', '.join(m.lower() for m in METHODS)}")
    overrides = {}
    for opt in opts:
        key, sep, raw = opt.partition("=")
        if not sep or key not in _PARAM_TYPES or key in ("method", "seed", "time_limit", "max_evals"):
            raise ValueError(f"bad parameter override {opt!r} in {label!r}")
        if key == "variant":
            overrides[key] = raw
        elif key in ("n_size", "p_hat"):
            overrides[key] = int(raw)
        else:
            overrides[key] = float(raw)
    return method, overrides


@dataclass(frozen=True)
class ExperimentSpec:
    instances: tuple[str, ...]
    methods: tuple[str, ...]
    reps: int = 1
    time_limit: float | None = None
    iterations: int | None = None
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.methods:
            raise ValueError("at least one method is required")
        if not self.instances:
            raise ValueError("no instance files given")
        if (self.time_limit is None) == (self.iterations is None):
            raise ValueError("give exactly one of a time limit or an iteration budget")
        for label in self.methods:
            parse_method(label)

    def params(self, label: str, run: int) -> SolverParams:
        method, overrides = parse_method(label)
        return SolverParams(
            method=method,
            time_limit=self.time_limit,
            max_evals=self.iterations,
            seed=self.seed + run,
            **overrides,
        )


@dataclass(frozen=True)
class ResultRow:
    instance: str
    method: str
    run: int
    seed: int
    makespan: int
    seconds: float | None  # None in iteration-budget mode
    iterations: int

    def __post_init__(self):
        if self.makespan < 0:
            raise ValueError("makespan must be non-negative")

    def cells(self) -> list[str]:
        secs = "" if self.seconds is None else repr(self.seconds)
        return [self.instance, self.method, str(self.run), str(self.seed), str(self.makespan), secs, str(self.iterations)]


@dataclass(frozen=True)
class SummaryRow:
    instance: str
    method: str
    runs: int
    best: int
    average: float


def instance_id(path: str) -> str:
    return Path(path).stem


@lru_cache(maxsize=64)
def _load(path: str):
    return load_instance(path)


def _run_one(task: tuple) -> ResultRow:
    spec, path, label, run = task
    params = spec.params(label, run)
    res = solve(_load(path), params)
    secs = res.seconds if spec.time_limit is not None else None
    return ResultRow(instance_id(path), label, run, params.seed, res.makespan, secs, res.evaluations)


def pool_size(threads: int | None = None) -> int:
    """Explicit value, else ``OPS_THREADS``, else the number of hardware threads."""
    if threads is None:
        env = os.environ.get("OPS_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    return threads


def expand_instances(pattern: str) -> tuple[str, ...]:
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise FileNotFoundError(f"no instance files match {pattern!r}")
    return tuple(paths)


def run_experiments(spec: ExperimentSpec) -> list[ResultRow]:
    """One row per (instance, method, run), ordered by that key."""
    for path in spec.instances:
        _load(path)  # fail early on unreadable or invalid files
    tasks = [(spec, path, label, run) for path in spec.instances for label in spec.methods for run in range(spec.reps)]
    workers = min(pool_size(spec.threads), len(tasks))
    if workers <= 1:
        rows = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_run_one, tasks))
    return sorted(rows, key=lambda r: (r.instance, r.method, r.run))


def summarize(rows: list[ResultRow]) -> list[SummaryRow]:
    groups: dict[tuple[str, str], list[int]] = {}
    for r in rows:
        groups.setdefault((r.instance, r.method), []).append(r.makespan)
    return [SummaryRow(inst, method, len(v), min(v), fmean(v)) for (inst, method), v in sorted(groups.items())]


def write_results(rows: list[ResultRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_HEADER)
        for r in rows:
            w.writerow(r.cells())


def read_results(path) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            ResultRow(
                d["instance"],
                d["method"],
                int(d["run"]),
                int(d["seed"]),
                int(d["makespan"]),
                float(d["seconds"]) if d["seconds"] else None,
                int(d["iterations"]),
            )
            for d in reader
        ]


def write_summary(summary: list[SummaryRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for s in summary:
            w.writerow([s.instance, s.method, s.runs, s.best, repr(s.average)])


def read_summary(path) -> list[SummaryRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            SummaryRow(d["instance"], d["method"], int(d["runs"]), int(d["best"]), float(d["average"]))
            for d in csv.DictReader(fh)
        ]


def rdi(f: float, best: float, worst: float) -> float:
    """Relative deviation index; 0 when every configuration scored the same."""
    if worst == best:
        return 0.0
    return (f - best) / (worst - best)


def compute_rdi(averages: dict[tuple[str, str], float]) -> tuple[dict[tuple[str, str], float], dict[str, float]]:
    """RDI per ``(config, instance)`` and its mean over instances per config.

    ``averages`` maps ``(config, instance)`` to the average makespan.
    """
    by_inst: dict[str, list[float]] = {}
    for (_, inst), f in averages.items():
        by_inst.setdefault(inst, []).append(f)
    per = {key: rdi(f, min(by_inst[key[1]]), max(by_inst[key[1]])) for key, f in averages.items()}
    configs: dict[str, list[float]] = {}
    for (cfg, _), v in sorted(per.items()):
        configs.setdefault(cfg, []).append(v)
    return per, {cfg: fmean(v) for cfg, v in configs.items()}


def compute_re(mks: int, lb: int) -> float:
    """Relative error of ``mks`` above the lower bound ``lb``, in percent."""
    if lb <= 0:
        raise ValueError(f"lower bound must be positive, got {lb}")
    return 100.0 * (mks - lb) / lb


def read_lower_bounds(path) -> dict[str, int]:
    """CSV with columns ``instance,lb``."""
    with open(path, newline="", encoding="utf-8") as fh:
        return {d["instance"]: int(d["lb"]) for d in csv.DictReader(fh)}


def re_table(summary: list[SummaryRow], lbs: dict[str, int]) -> tuple[list[tuple[str, str, float]], dict[str, float]]:
    """RE of the best makespan per (method, instance) and the mean RE per method.

    Instances without a lower bound are skipped.
    """
    rows = [(s.method, s.instance, compute_re(s.best, lbs[s.instance])) for s in summary if s.instance in lbs]
    means: dict[str, list[float]] = {}
    for method, _, v in rows:
        means.setdefault(method, []).append(v)
    return rows, {m: fmean(v) for m, v in sorted(means.items())}
