"""Reallocation neighborhood, makespan estimates and steepest descent.

A move takes a critical non-fixed operation ``i`` out of its machine sequence
and reinserts it into the sequence of some eligible machine ``k``. Positions
index the sequence of ``k`` with ``i`` removed, fixed operations included.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import decoder
from .budget import Budget
from .decoder import Schedule
from .encoding import Assignment, decode, reencode
from .graph import SolutionDigraph, build_digraph
from .instance import Instance

INF = float("inf")


@dataclass(frozen=True)
class Move:
    op: int
    machine: int
    position: int
    estimate: int


@dataclass(frozen=True)
class Candidates:
    seq: tuple[int, ...]  # target machine sequence without the moved op
    R: frozenset[int]
    L: frozenset[int]
    cbar_ub: float  # INF when the op has no successors


def candidate_sets(inst: Instance, sched: Schedule, g: SolutionDigraph, i: int, k: int) -> Candidates:
    seq = tuple(j for j in sched.phi[k - 1] if j != i)
    succs = inst.dag.succ[i]
    cbar_ub = min((sched.s[j] for j in succs), default=INF)
    slb = sched.s_lb[i]
    R = frozenset(j for j in seq if sched.cbar[j] > slb)
    if cbar_ub == INF:
        L = frozenset(seq)
    else:
        gap = sched.cmax - cbar_ub
        L = frozenset(j for j in seq if g.t[j] + sched.u[j] + sched.p[j] > gap)
    return Candidates(seq, R, L, cbar_ub)


def feasible_positions(R: frozenset[int], L: frozenset[int], seq: Sequence[int]) -> list[int]:
    """Positions with every op of L - R before them and every op of R - L at or after them."""
    lo, hi = 0, len(seq)
    for idx, j in enumerate(seq):
        in_r, in_l = j in R, j in L
        if in_l and not in_r:
            lo = max(lo, idx + 1)
        elif in_r and not in_l:
            hi = min(hi, idx)
    return list(range(lo, hi + 1))


def estimate_makespan(
    inst: Instance, sched: Schedule, g: SolutionDigraph, i: int, k: int, position: int, cand: Candidates
) -> int:
    p_ik = inst.op(i).machines[k]
    tail = 0 if cand.cbar_ub == INF else max(0, sched.cmax - int(cand.cbar_ub))
    both = cand.L & cand.R
    if not both:
        return sched.s_lb[i] + p_ik + tail
    index = {j: idx for idx, j in enumerate(cand.seq)}
    tau = sorted(both, key=lambda j: (sched.s[j], j))
    j = sum(1 for v in tau if index[v] < position)
    s, p, u, t = sched.s, sched.p, sched.u, g.t
    if j == 0:
        a = tau[0]
        return p_ik + sched.s_lb[i] + p[a] + u[a] + t[a]
    a = tau[j - 1]
    if j < len(tau):
        b = tau[j]
        return p_ik + s[a] + p[a] + u[a] + p[b] + u[b] + t[b]
    return p_ik + s[a] + p[a] + u[a] + tail


def _is_identity(inst: Instance, sched: Schedule, i: int, k: int, position: int, seq: Sequence[int]) -> bool:
    """True when reinserting ``i`` at ``position`` reproduces its current non-fixed order."""
    if k != sched.kappa[i]:
        return False
    fixed = inst.fixed_by_op
    full = sched.phi[k - 1]
    before_now = sum(1 for j in full[: full.index(i)] if j not in fixed)
    before_new = sum(1 for j in seq[:position] if j not in fixed)
    return before_now == before_new


def neighborhood(inst: Instance, sched: Schedule, g: SolutionDigraph) -> list[Move]:
    """All moves of critical non-fixed ops, in scan order: path order, machine, position."""
    fixed = inst.fixed_by_op
    moves = []
    for i in g.path[1:-1]:
        if i in fixed:
            continue
        for k in inst.eligible[i]:
            cand = candidate_sets(inst, sched, g, i, k)
            for pos in feasible_positions(cand.R, cand.L, cand.seq):
                if _is_identity(inst, sched, i, k, pos, cand.seq):
                    continue
                moves.append(Move(i, k, pos, estimate_makespan(inst, sched, g, i, k, pos, cand)))
    return moves


def moved_sequences(inst: Instance, sched: Schedule, move: Move) -> tuple[list[list[int]], list[int]]:
    """Machine sequences (fixed ops dropped) and machine map after ``move``."""
    i = move.op
    phi = [list(seq) for seq in sched.phi]
    phi[sched.kappa[i] - 1].remove(i)
    phi[move.machine - 1].insert(move.position, i)
    fixed = inst.fixed_by_op
    kappa = list(sched.kappa)
    kappa[i] = move.machine
    return [[j for j in seq if j not in fixed] for seq in phi], kappa


def apply_move(inst: Instance, sched: Schedule, move: Move) -> tuple[np.ndarray, Schedule]:
    """Genotype and decoded schedule of the neighbor reached by ``move``."""
    phi, kappa = moved_sequences(inst, sched, move)
    eligible = inst.eligible
    pi = tuple(eligible[i].index(kappa[i]) + 1 for i in inst.nonfixed)
    asg = Assignment(tuple(kappa), pi)
    order = {i: pos for pos, i in enumerate(sched.sigma)}
    x = reencode(phi, asg, inst, priority=order)
    asg2, seq = decode(x, inst)
    return x, decoder.build_schedule(inst, asg2, seq)


def best_move(moves: Sequence[Move]) -> Move | None:
    """Smallest estimate; the first one in scan order on ties."""
    best = None
    for mv in moves:
        if best is None or mv.estimate < best.estimate:
            best = mv
    return best


def local_search(
    x: np.ndarray,
    inst: Instance,
    budget: Budget | None = None,
    sched: Schedule | None = None,
    trace: list | None = None,
) -> tuple[np.ndarray, Schedule]:
    """Steepest descent on the estimate: decode the best-estimated neighbor, keep it if strictly better.

    ``trace`` receives ``(iteration, move, estimate, makespan)`` tuples.
    """
    if sched is None:
        asg, seq = decode(x, inst)
        sched = decoder.build_schedule(inst, asg, seq)
        if budget is not None:
            budget.charge()
    iteration = 0
    while budget is None or not budget.exhausted():
        g = build_digraph(inst, sched)
        mv = best_move(neighborhood(inst, sched, g))
        if mv is None:
            break
        x2, sched2 = apply_move(inst, sched, mv)
        if budget is not None:
            budget.charge()
        iteration += 1
        if trace is not None:
            trace.append((iteration, mv, mv.estimate, sched2.cmax))
        if sched2.cmax >= sched.cmax:
            break
        x, sched = x2, sched2
    return x, sched
