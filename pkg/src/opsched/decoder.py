"""Schedule construction from a machine assignment and an execution order.

Non-fixed operations are scheduled one at a time in the order ``sigma``, each
as early as its predecessors, its machine predecessor, the machine calendar
and any still-unsequenced fixed operation allow. Fixed operations are slotted
into the machine sequences as they get in the way, or appended at the end.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .calendar import (
    compute_delay,
    completion_time,
    earliest_start,
    is_valid_completion,
    is_valid_start,
    partial_completion,
)
from .encoding import Assignment, SequenceOrder, decode
from .instance import Instance


class FixedSetupWarning(UserWarning):
    """A fixed operation's given start leaves less room than its setup needs."""


@dataclass
class Schedule:
    kappa: tuple[int, ...]
    sigma: tuple[int, ...]
    s: list[int]
    c: list[int]
    cbar: list[int]
    u: list[int]
    p: list[int]
    pbar: list[int]
    xi: list[int]
    d: list[int]
    delay: list[int]
    s_lb: list[int]
    c_lb: list[int]
    phi: tuple[tuple[int, ...], ...]
    sigma_ifo: tuple[int, ...]
    cmax: int
    notes: list[str] = field(default_factory=list)

    @property
    def o(self) -> int:
        return len(self.s) - 1

    def ant(self, i: int) -> int:
        seq = self.phi[self.kappa[i] - 1]
        pos = self.position(i)
        return seq[pos - 1] if pos else 0

    def suc(self, i: int) -> int:
        seq = self.phi[self.kappa[i] - 1]
        pos = self.position(i)
        return seq[pos + 1] if pos + 1 < len(seq) else self.o + 1

    def position(self, i: int) -> int:
        return self._pos[i]

    @property
    def _pos(self) -> dict[int, int]:
        cache = self.__dict__.get("_pos_cache")
        if cache is None:
            cache = {i: idx for seq in self.phi for idx, i in enumerate(seq)}
            self.__dict__["_pos_cache"] = cache
        return cache

    def setup_start(self, i: int) -> int:
        return self.s[i] - self.xi[i]


def build_schedule(inst: Instance, asg: Assignment, seq: SequenceOrder) -> Schedule:
    """Decode ``(asg, seq)`` into a semi-active schedule."""
    o = inst.o
    kappa = asg.kappa
    setup = inst.setup
    pred = inst.dag.pred
    s = [0] * (o + 1)
    c = [0] * (o + 1)
    cbar = [0] * (o + 1)
    u = [0] * (o + 1)
    p = [0] * (o + 1)
    pbar = [0] * (o + 1)
    xi = [0] * (o + 1)
    d = [0] * (o + 1)
    delay = [0] * (o + 1)
    s_lb = [0] * (o + 1)
    c_lb = [0] * (o + 1)
    notes: list[str] = []

    pending: list[list[int]] = [[] for _ in range(inst.m + 1)]
    for f in sorted(inst.fixed, key=lambda f: (f.start, f.op), reverse=True):
        fs, fc, fcbar, fu, fp = inst.fixed_timing[f.op]
        s[f.op], c[f.op], cbar[f.op], u[f.op], p[f.op] = fs, fc, fcbar, fu, fp
        pbar[f.op] = inst.op(f.op).partial_time(f.machine)
        pending[f.machine].append(f.op)  # reversed: the earliest start is last

    phi: list[list[int]] = [[] for _ in range(inst.m + 1)]
    last = [0] * (inst.m + 1)
    order: list[int] = []

    def bounds(i: int) -> tuple[int, int]:
        ps = pred[i]
        lo_s = max([cbar[j] for j in ps] + [inst.op(i).release])
        lo_c = max([c[j] for j in ps], default=0)
        return lo_s, lo_c

    def sequence_fixed(f: int, k: int) -> None:
        ant = last[k]
        c_ant = c[ant] if ant else 0
        s_lb[f], c_lb[f] = bounds(f)
        xi[f] = setup.gamma(k, ant, f)
        d[f] = max(s_lb[f], c_ant + xi[f])
        msg = None
        if c_ant + xi[f] > s[f]:
            msg = f"fixed operation {f} starts at {s[f]} but its setup after {ant} needs until {c_ant + xi[f]}"
        elif earliest_start(inst.calendar(k), s[f], xi[f]) != s[f]:
            msg = f"fixed operation {f}: setup window ({s[f] - xi[f]}, {s[f]}] meets a downtime"
        if msg:
            notes.append(msg)
            warnings.warn(msg, FixedSetupWarning, stacklevel=3)
        phi[k].append(f)
        order.append(f)
        last[k] = f

    for i in seq.sigma:
        k = kappa[i]
        cal = inst.calendar(k)
        spec = inst.op(i)
        p[i] = spec.machines[k]
        pbar[i] = spec.partial_time(k)
        s_lb[i], c_lb[i] = bounds(i)
        floor = 0
        delays = 0
        queue = pending[k]
        while True:
            ant = last[k]
            c_ant = c[ant] if ant else 0
            xi[i] = setup.gamma(k, ant, i)
            d[i] = max(s_lb[i], c_ant + xi[i])
            s[i] = earliest_start(cal, max(d[i], floor), xi[i])
            c[i], u[i] = completion_time(cal, s[i], p[i])
            if queue:
                f = queue[-1]
                if c_ant <= s[f] < c[i] + setup.gamma(k, i, f):
                    queue.pop()
                    sequence_fixed(f, k)
                    continue
            if c[i] < c_lb[i]:
                delays += 1
                if delays > len(cal) + 2:
                    raise AssertionError(f"completion bound of operation {i} not reached after {delays - 1} delays")
                delay[i] = compute_delay(cal, c[i], c_lb[i])
                floor = completion_time(cal, s[i], delay[i])[0]
                continue
            break
        cbar[i] = partial_completion(cal, s[i], pbar[i])
        phi[k].append(i)
        order.append(i)
        last[k] = i

    leftovers = sorted((s[f], f, k) for k in range(1, inst.m + 1) for f in pending[k])
    for _, f, k in leftovers:
        sequence_fixed(f, k)

    cmax = max(c[1:], default=0)
    return Schedule(
        kappa=tuple(kappa),
        sigma=tuple(seq.sigma),
        s=s,
        c=c,
        cbar=cbar,
        u=u,
        p=p,
        pbar=pbar,
        xi=xi,
        d=d,
        delay=delay,
        s_lb=s_lb,
        c_lb=c_lb,
        phi=tuple(tuple(v) for v in phi[1:]),
        sigma_ifo=tuple(order),
        cmax=cmax,
        notes=notes,
    )


def evaluate(x: Sequence[float], inst: Instance) -> Schedule:
    """Decode a genotype all the way to a schedule."""
    asg, seq = decode(x, inst)
    return build_schedule(inst, asg, seq)


def makespan(x: Sequence[float], inst: Instance) -> int:
    return evaluate(x, inst).cmax


def schedule_violations(inst: Instance, sched: Schedule) -> list[str]:
    """Check a schedule against every model constraint; empty means feasible."""
    out = []
    o = inst.o
    seen = sorted(i for seq in sched.phi for i in seq)
    if seen != list(range(1, o + 1)):
        out.append("machine sequences do not cover every operation exactly once")
        return out
    for k, seq in enumerate(sched.phi, start=1):
        cal = inst.calendar(k)
        prev = 0
        for i in seq:
            spec = inst.op(i)
            if sched.kappa[i] != k or k not in spec.machines:
                out.append(f"op {i}: on machine {k} but assigned {sched.kappa[i]}")
            p = spec.machines.get(k, 0)
            si, ci = sched.s[i], sched.c[i]
            gamma = inst.setup.gamma(k, prev, i) if k in spec.machines else 0
            if sched.xi[i] != gamma:
                out.append(f"op {i}: setup {sched.xi[i]} differs from table value {gamma}")
            if (sched.c[prev] if prev else 0) + gamma > si:
                out.append(f"op {i}: starts at {si} before machine predecessor {prev} completes plus setup")
            if i in inst.fixed_by_op and si != inst.fixed_by_op[i].start:
                out.append(f"fixed op {i}: moved from {inst.fixed_by_op[i].start} to {si}")
            if not is_valid_start(cal, si):
                out.append(f"op {i}: start {si} inside a downtime")
            if not is_valid_completion(cal, ci):
                out.append(f"op {i}: completion {ci} inside a downtime")
            if gamma and any(a <= si and si - gamma < b for a, b in cal):
                out.append(f"op {i}: setup window ({si - gamma}, {si}] meets a downtime")
            if completion_time(cal, si, p) != (ci, sched.u[i]) or ci - si - sched.u[i] != p:
                out.append(f"op {i}: processing window [{si}, {ci}] does not hold p={p}")
            if sched.cbar[i] != partial_completion(cal, si, spec.partial_time(k)):
                out.append(f"op {i}: partial completion {sched.cbar[i]} is wrong")
            if si < spec.release:
                out.append(f"op {i}: starts at {si} before release {spec.release}")
            prev = i
    for a, b in inst.arcs:
        if sched.s[b] < sched.cbar[a]:
            out.append(f"arc ({a},{b}): {b} starts at {sched.s[b]} before {a} reaches {sched.cbar[a]}")
        if sched.c[b] < sched.c[a]:
            out.append(f"arc ({a},{b}): {b} completes before {a}")
    if sched.cmax != max(sched.c[1:], default=0):
        out.append("makespan differs from the largest completion time")
    return out


def schedule_csv(sched: Schedule) -> str:
    """Per-operation table with columns op, machine, setup_start, s, c, c_bar, u."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["op", "machine", "setup_start", "s", "c", "c_bar", "u"])
    for i in range(1, sched.o + 1):
        writer.writerow([i, sched.kappa[i], sched.setup_start(i), sched.s[i], sched.c[i], sched.cbar[i], sched.u[i]])
    return buf.getvalue()
