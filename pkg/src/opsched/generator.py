"""Random instance generator.

Only the size formulas of the large benchmark family are fixed by the model;
every distribution below is a documented choice (see :class:`GeneratorParams`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .calendar import completion_time, earliest_start, is_valid_start
from .instance import FixedAssignment, Instance, OperationSpec, SetupTable
from .rng import make_rng


@dataclass(frozen=True)
class GeneratorParams:
    n: int
    o_min: int
    o_max: int
    m_min: int
    m_max: int
    q: int
    seed: int = 0
    p_range: tuple[int, int] = (1, 99)
    setup_range: tuple[int, int] = (1, 20)
    max_eligible: int = 5
    release_fraction: float = 0.03
    release_range: tuple[int, int] = (1, 100)
    overlap_fraction: float = 0.10
    period_range: tuple[int, int] = (5, 50)
    horizon_factor: int = 8
    max_fixed: int = 2

    def __post_init__(self):
        if min(self.n, self.o_min, self.o_max, self.m_min, self.m_max) < 1 or self.q < 0:
            raise ValueError("sizes must be positive and q non-negative")
        if self.o_min > self.o_max:
            raise ValueError("o_min must not exceed o_max")
        if self.m_min > self.m_max:
            raise ValueError("m_min must not exceed m_max")


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def lops2_params(k: int, seed: int | None = None) -> GeneratorParams:
    """Size parameters of large instance ``k`` (51..100); the seed defaults to ``k``."""
    if not 51 <= k <= 100:
        raise ValueError(f"instance index {k} outside 51..100")
    return GeneratorParams(
        n=11 + _ceil_div(k * 189, 100),
        o_min=5,
        o_max=6 + _ceil_div(k * 14, 100),
        m_min=9 + _ceil_div(k * 20, 100),
        m_max=10 + _ceil_div(k * 90, 100),
        q=8,
        seed=k if seed is None else seed,
    )


def _job_arcs(rng: np.random.Generator, size: int) -> list[tuple[int, int]]:
    """Layered DAG over local indices ``0..size-1``, weakly connected."""
    layers: list[list[int]] = []
    nxt = 0
    while nxt < size:
        cap = 3 if nxt else min(3, max(1, size - 1))
        width = int(rng.integers(1, cap + 1))
        layers.append(list(range(nxt, min(size, nxt + width))))
        nxt += width
    parent = list(range(size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    preds: dict[int, set[int]] = {v: set() for v in range(size)}
    earlier: list[int] = []
    for depth, layer in enumerate(layers):
        if depth:
            prev = layers[depth - 1]
            for v in layer:
                first = prev[int(rng.integers(len(prev)))]
                preds[v].add(first)
                parent[find(v)] = find(first)
                if rng.random() < 0.5 and len(earlier) > 1:
                    second = earlier[int(rng.integers(len(earlier)))]
                    if second != first:
                        preds[v].add(second)
                        parent[find(v)] = find(second)
        earlier.extend(layer)
    # Roots whose component misses the first layer-1 op get one connecting arc.
    if len(layers) > 1:
        anchor = layers[1][0]
        targets = [v for v in range(len(layers[0]), size) if find(v) == find(anchor)]
        for root in layers[0]:
            if find(root) != find(anchor):
                target = targets[int(rng.integers(len(targets)))]
                preds[target].add(root)
                parent[find(root)] = find(anchor)
    return sorted((a, b) for b, ps in preds.items() for a in ps)


def _place_periods(rng: np.random.Generator, count: int, horizon: int, lo: int, hi: int) -> tuple[tuple[int, int], ...]:
    periods = []
    starts = sorted(int(v) for v in rng.integers(0, max(horizon, 1), size=count))
    prev_end = -2
    for a in starts:
        a = max(a, prev_end + 1)
        b = a + int(rng.integers(lo, hi + 1))
        periods.append((a, b))
        prev_end = b
    return tuple(periods)


def generate_instance(params: GeneratorParams) -> Instance:
    """Draw a valid instance; identical params give identical instances."""
    rng = make_rng(params.seed, "generator")
    m = int(rng.integers(params.m_min, params.m_max + 1))
    p_lo, p_hi = params.p_range

    jobs: list[int] = []
    arcs: list[tuple[int, int]] = []
    for job in range(1, params.n + 1):
        size = int(rng.integers(params.o_min, params.o_max + 1))
        base = len(jobs)
        jobs.extend([job] * size)
        arcs.extend((base + a + 1, base + b + 1) for a, b in _job_arcs(rng, size))
    o = len(jobs)

    machines: list[dict[int, int]] = []
    for _ in range(o):
        count = int(rng.integers(1, min(m, params.max_eligible) + 1))
        ks = sorted(int(k) + 1 for k in rng.choice(m, size=count, replace=False))
        machines.append({k: int(rng.integers(p_lo, p_hi + 1)) for k in ks})

    releases = [0] * o
    thetas = [Fraction(1)] * o
    for i in range(o):
        if rng.random() < params.release_fraction:
            releases[i] = int(rng.integers(params.release_range[0], params.release_range[1] + 1))
        if rng.random() < params.overlap_fraction:
            thetas[i] = Fraction(int(rng.integers(2, 10)), 10)

    loads: dict[int, float] = {}
    for i in range(o):
        loads[jobs[i]] = loads.get(jobs[i], 0.0) + sum(machines[i].values()) / len(machines[i])
    horizon = int(params.horizon_factor * sum(loads.values()) / len(loads))
    calendars = tuple(
        _place_periods(rng, int(rng.integers(0, params.q + 1)), horizon, *params.period_range)
        for _ in range(m)
    )

    fixed = _choose_fixed(rng, params, o, arcs, machines, releases, calendars, horizon)

    operations = tuple(OperationSpec(jobs[i], machines[i], releases[i], thetas[i]) for i in range(o))
    setup = SetupTable.for_operations(m, operations)
    s_lo, s_hi = params.setup_range
    for k in range(1, m + 1):
        n_k = len(setup.ops[k])
        if n_k:
            setup.set_matrix(k, rng.integers(s_lo, s_hi + 1, size=(n_k + 1, n_k)).tolist())
    return Instance(params.n, m, operations, tuple(arcs), calendars, setup, tuple(fixed))


def _choose_fixed(rng, params, o, arcs, machines, releases, calendars, horizon):
    has_pred = {b for _, b in arcs}
    roots = [i for i in range(1, o + 1) if i not in has_pred]
    count = min(int(rng.integers(0, params.max_fixed + 1)), len(roots))
    if not count:
        return []
    chosen = sorted(int(v) for v in rng.choice(roots, size=count, replace=False))
    busy: dict[int, list[tuple[int, int]]] = {}
    fixed = []
    for i in chosen:
        spec = machines[i - 1]
        k = sorted(spec)[int(rng.integers(len(spec)))]
        p = spec[k]
        machines[i - 1] = {k: p}
        releases[i - 1] = 0
        cal = calendars[k - 1]
        # Leave room for the largest possible setup right before the start.
        room = params.setup_range[1]
        s = earliest_start(cal, room + int(rng.integers(0, max(horizon // 2, 1))), room)
        while True:
            c, _ = completion_time(cal, s, p)
            clash = [(a, b) for a, b in busy.get(k, []) if s - room < b and a < c]
            if not clash:
                break
            s = earliest_start(cal, max(b for _, b in clash) + room, room)
        assert is_valid_start(cal, s)
        busy.setdefault(k, []).append((s - room, c))
        fixed.append(FixedAssignment(i, k, s))
    return fixed
