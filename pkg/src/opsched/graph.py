"""Weighted digraph of a decoded schedule, longest paths and tail times.

Nodes are ``0`` (source), the operations ``1..o`` and ``o + 1`` (sink). Arc
weights are chosen so that the longest path from the source to an operation,
counting the operation's own node weight, equals its completion time.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

from .decoder import Schedule
from .instance import Instance


@dataclass
class SolutionDigraph:
    o: int
    node_w: list[int]
    succ: list[dict[int, int]]  # succ[a][b] = weight of arc (a, b)
    machine_suc: list[int]
    schedule: Schedule
    t: list[int] | None = None
    next: list[int] | None = None
    path: list[int] = field(default_factory=list)

    @property
    def sink(self) -> int:
        return self.o + 1

    def arcs(self):
        for a, nbrs in enumerate(self.succ):
            for b, w in nbrs.items():
                yield a, b, w

    def weight(self, a: int, b: int) -> int:
        return self.succ[a][b]

    def pred_lists(self) -> list[list[int]]:
        pred: list[list[int]] = [[] for _ in range(self.o + 2)]
        for a, b, _ in self.arcs():
            pred[b].append(a)
        return pred


def _add(succ: list[dict[int, int]], a: int, b: int, w: int) -> None:
    old = succ[a].get(b)
    if old is None or w > old:
        succ[a][b] = w


def build_digraph(inst: Instance, sched: Schedule) -> SolutionDigraph:
    """Build the schedule's digraph and compute tails and a critical path."""
    o = inst.o
    sink = o + 1
    succ: list[dict[int, int]] = [dict() for _ in range(o + 2)]
    node_w = [0] * (o + 2)
    for i in range(1, o + 1):
        node_w[i] = sched.s[i] - sched.d[i] + sched.u[i] + sched.p[i]
    for a, b in inst.arcs:
        _add(succ, a, b, sched.cbar[a] - sched.c[a])
    machine_suc = [sink] * (o + 2)
    for seq in sched.phi:
        if not seq:
            continue
        first = seq[0]
        _add(succ, 0, first, max(inst.op(first).release, sched.xi[first]))
        for a, b in zip(seq, seq[1:]):
            _add(succ, a, b, sched.xi[b])
            machine_suc[a] = b
        _add(succ, seq[-1], sink, 0)
    # Release dates also bind operations that are not first on their machine.
    for i in range(1, o + 1):
        r = inst.op(i).release
        if r > 0:
            _add(succ, 0, i, r)
    g = SolutionDigraph(o, node_w, succ, machine_suc, sched)
    tail_times(g, sched.sigma_ifo)
    critical_path(g)
    return g


def topological_order(g: SolutionDigraph) -> list[int]:
    """Kahn order of all nodes (smallest id first); raises on a cycle."""
    indeg = [0] * (g.o + 2)
    for _, b, _ in g.arcs():
        indeg[b] += 1
    ready = [v for v in range(g.o + 2) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for b in g.succ[v]:
            indeg[b] -= 1
            if indeg[b] == 0:
                heapq.heappush(ready, b)
    if len(order) != g.o + 2:
        raise ValueError("solution digraph has a cycle")
    return order


def heads(g: SolutionDigraph) -> list[int]:
    """Longest path weight from the source to each node, node weight included."""
    best = [None] * (g.o + 2)
    best[0] = 0
    for v in topological_order(g):
        if best[v] is None:
            continue
        for b, w in g.succ[v].items():
            val = best[v] + w + g.node_w[b]
            if best[b] is None or val > best[b]:
                best[b] = val
    return [0 if v is None else v for v in best]


def longest_path_value(g: SolutionDigraph) -> int:
    return heads(g)[g.sink]


def _sweep_order(g: SolutionDigraph, sigma_ifo: Sequence[int]) -> list[int]:
    """``sigma_ifo`` if every arc between operations points forward in it, else a stable repair.

    Fixed operations appended at the end of decoding can precede, in the
    precedence relation, operations that were scheduled before them; the
    repair is a topological sort that otherwise keeps the ``sigma_ifo`` order.
    """
    rank = {v: idx for idx, v in enumerate(sigma_ifo)}
    sink = g.sink
    if all(rank[a] < rank[b] for a in sigma_ifo for b in g.succ[a] if b != sink):
        return list(sigma_ifo)
    indeg = {v: 0 for v in sigma_ifo}
    for a in sigma_ifo:
        for b in g.succ[a]:
            if b != sink:
                indeg[b] += 1
    ready = [(rank[v], v) for v in sigma_ifo if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, v = heapq.heappop(ready)
        order.append(v)
        for b in g.succ[v]:
            if b != sink:
                indeg[b] -= 1
                if indeg[b] == 0:
                    heapq.heappush(ready, (rank[b], b))
    if len(order) != len(sigma_ifo):
        raise ValueError("solution digraph has a cycle")
    return order


def tail_times(g: SolutionDigraph, sigma_ifo: Sequence[int]) -> list[int]:
    """Longest path weight from each node to the sink, excluding the node itself.

    Also records ``next``: the successor realizing the maximum, preferring the
    machine successor and then the smallest node id.
    """
    o, sink = g.o, g.sink
    t = [0] * (o + 2)
    nxt = [sink] * (o + 2)
    for i in reversed(_sweep_order(g, sigma_ifo)):
        vals = {j: t[j] + g.node_w[j] + w for j, w in g.succ[i].items()}
        best = max(vals.values())
        ms = g.machine_suc[i]
        t[i] = best
        nxt[i] = ms if vals.get(ms) == best else min(j for j, v in vals.items() if v == best)
    vals = {j: t[j] + g.node_w[j] + w for j, w in g.succ[0].items()}
    t[0] = max(vals.values(), default=0)
    nxt[0] = min((j for j, v in vals.items() if v == t[0]), default=sink)
    g.t, g.next = t, nxt
    return t


def tail_times_dp(g: SolutionDigraph) -> list[int]:
    """Tails by a plain reverse-topological pass (cross-check for :func:`tail_times`)."""
    t = [0] * (g.o + 2)
    for v in reversed(topological_order(g)):
        vals = [t[b] + g.node_w[b] + w for b, w in g.succ[v].items()]
        t[v] = max(vals, default=0)
    return t


def critical_path(g: SolutionDigraph) -> list[int]:
    """Follow ``next`` from the source to the sink."""
    if g.next is None:
        tail_times(g, g.schedule.sigma_ifo)
    path = [0]
    v = 0
    while v != g.sink:
        v = g.next[v]
        path.append(v)
    g.path = path
    return path


def path_weight(g: SolutionDigraph, path: Sequence[int]) -> int:
    return sum(g.succ[a][b] + g.node_w[b] for a, b in zip(path, path[1:]))


def digraph_text(g: SolutionDigraph) -> str:
    """Weighted edge list ``u v w``, one arc per line, node weights as comments."""
    lines = [f"# node {v} {g.node_w[v]}" for v in range(g.o + 2)]
    lines += [f"{a} {b} {w}" for a, b, w in sorted(g.arcs())]
    return "\n".join(lines) + "\n"
