"""Random-key genotype: machine assignment and execution order.

A genotype ``x`` has ``2 * obar`` components in ``[0, 1)``. The first half
picks a machine for each non-fixed operation, the second half orders them.
Component ``j`` of either half belongs to the ``j``-th smallest non-fixed op.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import floor
from typing import Sequence

import numpy as np

from .instance import Instance


@dataclass(frozen=True)
class Assignment:
    kappa: tuple[int, ...]  # machine per op, index 0 unused
    pi: tuple[int, ...]  # 1-based index into K of each non-fixed op

    def machine(self, i: int) -> int:
        return self.kappa[i]


@dataclass(frozen=True)
class SequenceOrder:
    sigma: tuple[int, ...]
    phi: tuple[tuple[int, ...], ...]  # per machine, index k - 1


def split(x: np.ndarray, obar: int) -> tuple[np.ndarray, np.ndarray]:
    return x[:obar], x[obar:]


def machine_index(value: float, size: int) -> int:
    """``floor(value * size + 1)`` clamped to ``size``."""
    return min(int(floor(value * size + 1)), size)


def decode_assignment(x: Sequence[float], inst: Instance) -> Assignment:
    nonfixed = inst.nonfixed
    if len(x) != 2 * len(nonfixed):
        raise ValueError(f"genotype has {len(x)} components, expected {2 * len(nonfixed)}")
    kappa = [0] * (inst.o + 1)
    for f in inst.fixed:
        kappa[f.op] = f.machine
    eligible = inst.eligible
    pi = []
    for j, i in enumerate(nonfixed):
        ks = eligible[i]
        idx = machine_index(float(x[j]), len(ks))
        pi.append(idx)
        kappa[i] = ks[idx - 1]
    return Assignment(tuple(kappa), tuple(pi))


def _phi(order: Sequence[int], kappa: Sequence[int], m: int) -> tuple[tuple[int, ...], ...]:
    per: list[list[int]] = [[] for _ in range(m)]
    for i in order:
        per[kappa[i] - 1].append(i)
    return tuple(tuple(p) for p in per)


def _linear_extension(inst: Instance, key) -> list[int]:
    """Eligible-set loop over non-fixed ops: repeatedly take the smallest ``key(i), i``."""
    fixed = inst.fixed_by_op
    pred, succ = inst.dag.pred, inst.dag.succ
    waiting = {}
    ready = []
    for i in inst.nonfixed:
        count = sum(1 for j in pred[i] if j not in fixed)
        if count:
            waiting[i] = count
        else:
            ready.append((key(i), i))
    heapq.heapify(ready)
    order = []
    while ready:
        _, i = heapq.heappop(ready)
        order.append(i)
        for j in succ[i]:
            if j in waiting:
                waiting[j] -= 1
                if not waiting[j]:
                    del waiting[j]
                    heapq.heappush(ready, (key(j), j))
    if waiting:
        raise ValueError("precedence relation among non-fixed operations is cyclic")
    return order


def decode_sequence(x: Sequence[float], asg: Assignment, inst: Instance) -> SequenceOrder:
    obar = len(inst.nonfixed)
    col = {i: obar + j for j, i in enumerate(inst.nonfixed)}
    sigma = _linear_extension(inst, lambda i: float(x[col[i]]))
    return SequenceOrder(tuple(sigma), _phi(sigma, asg.kappa, inst.m))


def decode(x: Sequence[float], inst: Instance) -> tuple[Assignment, SequenceOrder]:
    asg = decode_assignment(x, inst)
    return asg, decode_sequence(x, asg, inst)


def reencode(
    phi: Sequence[Sequence[int]],
    asg: Assignment,
    inst: Instance,
    priority: Sequence[int] | None = None,
) -> np.ndarray:
    """Genotype whose decode gives ``asg`` and the per-machine orders of ``phi``.

    ``phi`` lists non-fixed operations only. The global order is a topological
    sort of the precedence arcs plus the machine chains, preferring the smaller
    ``priority`` value (default: op id). Raises ``ValueError`` when the chains
    and the precedence arcs form a cycle.
    """
    nonfixed = inst.nonfixed
    obar = len(nonfixed)
    fixed = inst.fixed_by_op
    succ: dict[int, list[int]] = {i: [j for j in inst.dag.succ[i] if j not in fixed] for i in nonfixed}
    indeg = {i: sum(1 for j in inst.dag.pred[i] if j not in fixed) for i in nonfixed}
    seen = set()
    for chain in phi:
        for a, b in zip(chain, chain[1:]):
            succ[a].append(b)
            indeg[b] += 1
        seen.update(chain)
    if seen != set(nonfixed):
        raise ValueError("machine sequences must cover every non-fixed operation exactly once")
    key = (lambda i: i) if priority is None else (lambda i: priority[i])
    ready = [(key(i), i) for i in nonfixed if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, i = heapq.heappop(ready)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, (key(j), j))
    if len(order) != obar:
        raise ValueError("machine sequences conflict with the precedence relation (cycle)")

    x = np.empty(2 * obar)
    col = {i: j for j, i in enumerate(nonfixed)}
    eligible = inst.eligible
    for j, i in enumerate(nonfixed):
        ks = eligible[i]
        x[j] = (ks.index(asg.kappa[i]) + 0.5) / len(ks)
    for rank, i in enumerate(order):
        x[obar + col[i]] = rank / obar
    return x


def sequence_positions(seq: SequenceOrder) -> dict[int, int]:
    return {i: pos for pos, i in enumerate(seq.sigma)}
