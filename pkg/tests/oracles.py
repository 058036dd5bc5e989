"""Independent reference implementations used only by the tests.

Time is walked one unit at a time: unit ``[t, t + 1]`` is usable on a machine
unless some downtime ``[a, b]`` has ``a <= t < b``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import ceil

import numpy as np

from opsched import decoder
from opsched.encoding import Assignment, SequenceOrder
from opsched.generator import GeneratorParams, generate_instance
from opsched.graph import build_digraph
from opsched.instance import Instance
from opsched.local_search import candidate_sets, feasible_positions

SCAN_LIMIT = 100_000


def unit_free(cal, t: int) -> bool:
    return not any(a <= t < b for a, b in cal)


def walk(cal, s: int, units: int) -> int:
    """Time at which ``units`` usable units starting at ``s`` are done."""
    t = s
    while units:
        if unit_free(cal, t):
            units -= 1
        t += 1
    return t


def start_ok(cal, s: int, setup: int) -> bool:
    """Start outside every ``[a, b)`` and setup units ``s - setup .. s - 1`` all usable."""
    if any(a <= s < b for a, b in cal):
        return False
    return all(unit_free(cal, t) for t in range(s - setup, s))


def partial_units(inst: Instance, i: int, k: int) -> int:
    spec = inst.op(i)
    return ceil(Fraction(spec.theta) * spec.machines[k])


def oracle_schedule(inst: Instance, kappa, sigma) -> dict:
    """Scan integer starts upward for each op in ``sigma``; first start meeting every constraint wins."""
    o = inst.o
    gamma = inst.setup.gamma
    s, c, cbar = [0] * (o + 1), [0] * (o + 1), [0] * (o + 1)
    pending = {k: [] for k in range(1, inst.m + 1)}
    for f in sorted(inst.fixed, key=lambda f: (f.start, f.op)):
        cal = inst.calendar(f.machine)
        s[f.op] = f.start
        c[f.op] = walk(cal, f.start, inst.op(f.op).machines[f.machine])
        cbar[f.op] = walk(cal, f.start, partial_units(inst, f.op, f.machine))
        pending[f.machine].append(f.op)
    last = {k: 0 for k in range(1, inst.m + 1)}
    pred = inst.dag.pred
    for i in sigma:
        k = kappa[i]
        cal = inst.calendar(k)
        p = inst.op(i).machines[k]
        lo = max([cbar[j] for j in pred[i]] + [inst.op(i).release, 0])
        need_c = max([c[j] for j in pred[i]], default=0)
        queue = pending[k]
        found = None
        for start in range(lo, lo + SCAN_LIMIT):
            for h in range(len(queue) + 1):
                ant = queue[h - 1] if h else last[k]
                xi = gamma(k, ant, i)
                if start < (c[ant] if ant else 0) + xi or not start_ok(cal, start, xi):
                    continue
                end = walk(cal, start, p)
                if end < need_c:
                    continue
                if h < len(queue) and end + gamma(k, i, queue[h]) > s[queue[h]]:
                    continue
                found = (start, end, h)
                break
            if found:
                break
        if found is None:
            raise RuntimeError(f"oracle found no start for op {i}")
        s[i], c[i], h = found
        cbar[i] = walk(cal, s[i], partial_units(inst, i, k))
        pending[k] = queue[h:]
        last[k] = i
    return {"s": s, "c": c, "cbar": cbar, "cmax": max(c[1:], default=0)}


def micro_params(seed: int, max_ops: int = 8, max_fixed: int = 1) -> GeneratorParams:
    """Tiny instance parameters: up to 3 jobs, ``max_ops`` ops, 3 machines, 2 downtimes each."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    return GeneratorParams(
        n=n,
        o_min=1,
        o_max=max(1, max_ops // n),
        m_min=1,
        m_max=3,
        q=2,
        seed=seed,
        p_range=(1, 9),
        setup_range=(0, 4),
        release_range=(1, 15),
        release_fraction=0.25,
        overlap_fraction=0.35,
        period_range=(1, 6),
        max_fixed=max_fixed,
    )


def micro_instance(seed: int, max_ops: int = 8, max_fixed: int = 1) -> Instance:
    return generate_instance(micro_params(seed, max_ops, max_fixed))


def linear_extensions(inst: Instance):
    """Every ordering of the non-fixed ops that respects the precedence arcs among them."""
    fixed = inst.fixed_by_op
    pred = inst.dag.pred
    ops = list(inst.nonfixed)

    def rec(done: list[int], left: set[int]):
        if not left:
            yield tuple(done)
            return
        for i in sorted(left):
            if all(j in fixed or j not in left for j in pred[i]):
                done.append(i)
                left.remove(i)
                yield from rec(done, left)
                left.add(i)
                done.pop()

    yield from rec([], set(ops))


def enumerate_optimum(inst: Instance) -> int:
    """Best makespan over all machine assignments and execution orders of the non-fixed ops.

    Orders that give the same machine sequences decode to the same schedule,
    so each ``(assignment, sequences)`` pair is decoded once.
    """
    ops = list(inst.nonfixed)
    base = [0] * (inst.o + 1)
    for f in inst.fixed:
        base[f.op] = f.machine
    choices = [inst.eligible[i] for i in ops]
    best = None
    seen = set()
    orders = list(linear_extensions(inst))
    for machines in itertools.product(*choices):
        kappa = list(base)
        for i, k in zip(ops, machines):
            kappa[i] = k
        for sigma in orders:
            phi = tuple(tuple(i for i in sigma if kappa[i] == k) for k in range(1, inst.m + 1))
            if phi in seen:
                continue
            seen.add(phi)
            pi = tuple(inst.eligible[i].index(kappa[i]) + 1 for i in ops)
            sched = decoder.build_schedule(inst, Assignment(tuple(kappa), pi), SequenceOrder(sigma, phi))
            if best is None or sched.cmax < best:
                best = sched.cmax
        seen.clear()
    return best


def reach(adj, start):
    seen, stack = set(), [start]
    while stack:
        for y in adj.get(stack.pop(), ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def without(g, inst, sched, i):
    """Adjacency of the digraph with ``i`` taken out of its machine sequence."""
    adj = {a: set(nb) for a, nb in enumerate(g.succ)}
    a, b = sched.ant(i), sched.suc(i)
    if a == 0 or i not in inst.dag.succ[a]:
        adj[a].discard(i)
    if b not in inst.dag.succ[i]:
        adj[i].discard(b)
    adj[a].add(b)
    return adj


def has_cycle(adj, n):
    color = {}

    def dfs(v):
        color[v] = 1
        for w in adj.get(v, ()):
            c = color.get(w, 0)
            if c == 1 or (c == 0 and dfs(w)):
                return True
        color[v] = 2
        return False

    return any(color.get(v, 0) == 0 and dfs(v) for v in range(n))


def window_failures(inst, sched):
    """Count R/L soundness failures and cyclic insertions for one schedule."""
    g = build_digraph(inst, sched)
    crit = set(g.path[1:-1])
    out = {"R1": 0, "R2": 0, "L1": 0, "L2": 0, "cycle": 0, "moves": 0}
    for i in inst.nonfixed:
        d = without(g, inst, sched, i)
        fwd = reach(d, i)
        for k in inst.eligible[i]:
            cand = candidate_sets(inst, sched, g, i, k)
            for j in cand.seq:
                back = i in reach(d, j)
                out["R1"] += j in cand.R and back
                out["R2"] += j not in cand.R and j in fwd
                out["L1"] += j in cand.L and j in fwd
                out["L2"] += i in crit and j not in cand.L and back
            if i not in crit:
                continue
            for pos in feasible_positions(cand.R, cand.L, cand.seq):
                adj = {a: set(nb) for a, nb in d.items()}
                a = cand.seq[pos - 1] if pos else 0
                b = cand.seq[pos] if pos < len(cand.seq) else inst.o + 1
                adj[a].add(i)
                adj[i].add(b)
                out["moves"] += 1
                out["cycle"] += has_cycle(adj, inst.o + 2)
    return out
