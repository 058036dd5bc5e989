"""Population and trajectory metaheuristics over the random-key genotype.

All methods start from CBFS solutions, use the same local search, and stop on
a shared :class:`Budget`. ``f(x)`` is the makespan of the decoded schedule.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import decoder
from .budget import Budget
from .decoder import Schedule
from .encoding import Assignment, _phi, decode, reencode
from .graph import build_digraph
from .instance import Instance
from .local_search import Move, apply_move, local_search, neighborhood
from .rng import STREAMS, make_rng

METHODS = ("DE", "GA", "ILS", "TS", "TSDE")
VARIANTS = ("rand1", "best1")
UPPER = float(np.nextafter(1.0, 0.0))  # 1 - 1e-16 rounds to this double
FAMILY_THRESHOLD = 200  # o <= 200 gets the small-instance defaults


@dataclass(frozen=True)
class SolverParams:
    method: str = "TSDE"
    n_size: int = 8
    zeta: float | None = None  # None: 0.7 for small instances, 0.1 otherwise
    p_cro: float = 0.0
    variant: str = "rand1"
    p_mut: float | None = None  # None: 0.36 for small instances, 0.11 otherwise
    p_hat: int = 2
    lam: float = 1.2
    time_limit: float | None = None
    max_evals: int | None = None
    seed: int = 0
    stagnation: float | None = None  # TSDE phase-1 window; None picks the default

    def __post_init__(self):
        method = self.method.upper()
        object.__setattr__(self, "method", method)
        if method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be rand1 or best1, got {self.variant!r}")
        if method in ("DE", "GA", "TSDE") and self.n_size < 4:
            raise ValueError(f"n_size must be at least 4, got {self.n_size}")
        if method == "GA" and self.n_size % 2:
            raise ValueError(f"GA needs an even n_size, got {self.n_size}")
        if self.zeta is not None and not 0 < self.zeta <= 2:
            raise ValueError(f"zeta must lie in (0, 2], got {self.zeta}")
        for name in ("p_cro", "p_mut"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.p_hat < 1:
            raise ValueError(f"p_hat must be at least 1, got {self.p_hat}")
        if not 0 <= self.lam <= 2:
            raise ValueError(f"lambda must lie in [0, 2], got {self.lam}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")

    def resolve(self, inst: Instance) -> "SolverParams":
        """Fill instance-dependent defaults and check ``p_hat`` against the genotype length."""
        small = inst.o <= FAMILY_THRESHOLD
        zeta = self.zeta if self.zeta is not None else (0.7 if small else 0.1)
        p_mut = self.p_mut if self.p_mut is not None else (0.36 if small else 0.11)
        dim = 2 * len(inst.nonfixed)
        if dim and self.p_hat > dim:
            raise ValueError(f"p_hat must lie in 1..{dim}, got {self.p_hat}")
        return replace(self, zeta=zeta, p_mut=p_mut)

    def budget(self) -> Budget:
        if self.time_limit is None and self.max_evals is None:
            raise ValueError("set a time limit or an evaluation cap")
        deadline = None if self.time_limit is None else time.monotonic() + self.time_limit
        return Budget(deadline=deadline, max_evals=self.max_evals)


@dataclass
class Result:
    method: str
    x: np.ndarray
    schedule: Schedule
    evaluations: int
    seconds: float
    history: list[tuple[int, float, int]] = field(default_factory=list)  # (evals, seconds, best)

    @property
    def makespan(self) -> int:
        return self.schedule.cmax


class _Tracker:
    """Best-so-far solution with an improvement history."""

    def __init__(self, budget: Budget):
        self.budget = budget
        self.started = time.monotonic()
        self.x: np.ndarray | None = None
        self.sched: Schedule | None = None
        self.history: list[tuple[int, float, int]] = []
        self.last_improvement = budget.clock()

    def offer(self, x: np.ndarray, sched: Schedule) -> bool:
        if self.sched is not None and sched.cmax >= self.sched.cmax:
            return False
        self.x, self.sched = x.copy(), sched
        self.history.append((self.budget.evals, time.monotonic() - self.started, sched.cmax))
        self.last_improvement = self.budget.clock()
        return True

    def result(self, method: str) -> Result:
        return Result(method, self.x, self.sched, self.budget.evals, time.monotonic() - self.started, self.history)


def _evaluate(x: np.ndarray, inst: Instance, budget: Budget) -> Schedule:
    asg, seq = decode(x, inst)
    budget.charge()
    return decoder.build_schedule(inst, asg, seq)


def tabu_tenure(lam: float, obar: int) -> int:
    """``ceil(lam * ln(obar)**2)``; zero for fewer than two free operations."""
    if obar < 2:
        return 0
    return math.ceil(lam * math.log(obar) ** 2)


def cbfs_order(inst: Instance, costs) -> list[int]:
    """Breadth-first sequencing: each round takes every eligible op in increasing cost."""
    fixed = inst.fixed_by_op
    pred, succ = inst.dag.pred, inst.dag.succ
    waiting = {i: sum(1 for j in pred[i] if j not in fixed) for i in inst.nonfixed}
    layer = [i for i, n in waiting.items() if n == 0]
    order = []
    while layer:
        layer.sort(key=lambda i: (costs[i - 1], i))
        order.extend(layer)
        nxt = []
        for i in layer:
            for j in succ[i]:
                if j in waiting:
                    waiting[j] -= 1
                    if waiting[j] == 0:
                        nxt.append(j)
        layer = nxt
    return order


def cbfs_initial(inst: Instance, costs, rng: np.random.Generator | None = None) -> np.ndarray:
    """Fastest machine per op, CBFS order, reencoded to a genotype.

    ``costs[i - 1]`` is the cost of op ``i``; ``rng`` is unused and kept for
    call-site symmetry with the drivers.
    """
    kappa = [0] * (inst.o + 1)
    for f in inst.fixed:
        kappa[f.op] = f.machine
    pi = []
    for i in inst.nonfixed:
        times = inst.op(i).machines
        k = min(times, key=lambda k: (times[k], k))
        kappa[i] = k
        pi.append(inst.eligible[i].index(k) + 1)
    order = cbfs_order(inst, costs)
    rank = {i: r for r, i in enumerate(order)}
    return reencode(_phi(order, kappa, inst.m), Assignment(tuple(kappa), tuple(pi)), inst, priority=rank)


def _cbfs(inst: Instance, rng: np.random.Generator) -> np.ndarray:
    return cbfs_initial(inst, rng.random(inst.o))


def perturb(x: np.ndarray, p_hat: int, rng: np.random.Generator) -> np.ndarray:
    """Copy of ``x`` with ``p_hat`` distinct positions redrawn uniformly."""
    y = x.copy()
    idx = rng.choice(len(x), size=p_hat, replace=False)
    y[idx] = rng.random(p_hat)
    return y


def de_mutant(a: np.ndarray, b: np.ndarray, c: np.ndarray, zeta: float) -> np.ndarray:
    return np.clip(a + zeta * (b - c), 0.0, UPPER)


def de_trial(x: np.ndarray, v: np.ndarray, p_cro: float, rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover: take ``v[j]`` when a coin is at most ``p_cro`` or ``j`` is the forced index."""
    forced = rng.integers(len(x))
    mask = rng.random(len(x)) <= p_cro
    mask[forced] = True
    return np.where(mask, v, x)


def de_indices(i: int, n: int, variant: str, fitness, rng: np.random.Generator) -> tuple[int, int, int]:
    if variant == "best1":
        r1 = int(np.argmin(fitness))
        pool = [j for j in range(n) if j != i and j != r1]
        r2, r3 = (int(v) for v in rng.choice(pool, size=2, replace=False))
        return r1, r2, r3
    pool = [j for j in range(n) if j != i]
    r1, r2, r3 = (int(v) for v in rng.choice(pool, size=3, replace=False))
    return r1, r2, r3


def _de(inst, params, rng, budget, tracker, pop, scheds) -> None:
    n = len(pop)
    fit = [s.cmax for s in scheds]
    while not budget.exhausted():
        for i in range(n):
            if budget.exhausted():
                return
            r1, r2, r3 = de_indices(i, n, params.variant, fit, rng)
            v = de_mutant(pop[r1], pop[r2], pop[r3], params.zeta)
            u = de_trial(pop[i], v, params.p_cro, rng)
            w, sw = local_search(u, inst, budget)
            tracker.offer(w, sw)
            if sw.cmax < fit[i]:
                pop[i], scheds[i], fit[i] = w, sw, sw.cmax


def _initial_population(inst, params, rng, budget, tracker):
    pop, scheds = [], []
    for _ in range(params.n_size):
        x = _cbfs(inst, rng)
        s = _evaluate(x, inst, budget)
        tracker.offer(x, s)
        pop.append(x)
        scheds.append(s)
    return pop, scheds


def _run_de(inst, params, rng, budget, tracker):
    pop, scheds = _initial_population(inst, params, rng, budget, tracker)
    _de(inst, params, rng, budget, tracker, pop, scheds)


def ga_crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    keep = rng.random(len(a)) <= 0.5
    return np.where(keep, a, b), np.where(keep, b, a)


def ga_mutate(x: np.ndarray, p_mut: float, rng: np.random.Generator) -> bool:
    """Redraw one random gene with probability ``p_mut``; returns whether it happened."""
    if rng.random() >= p_mut:
        return False
    x[rng.integers(len(x))] = rng.random()
    return True


def _run_ga(inst, params, rng, budget, tracker):
    pop, scheds = _initial_population(inst, params, rng, budget, tracker)
    n = len(pop)
    while not budget.exhausted():
        fit = [s.cmax for s in scheds]
        new, new_s = [], []
        for _ in range(n // 2):
            if budget.exhausted():
                return
            r1, r2, r3, r4 = (int(v) for v in rng.choice(n, size=4, replace=False))
            a = r1 if fit[r1] <= fit[r2] else r2
            b = r3 if fit[r3] <= fit[r4] else r4
            for child in ga_crossover(pop[a], pop[b], rng):
                ga_mutate(child, params.p_mut, rng)
                w, sw = local_search(child, inst, budget)
                tracker.offer(w, sw)
                new.append(w)
                new_s.append(sw)
        old_best = int(np.argmin(fit))
        new_fit = [s.cmax for s in new_s]
        if min(new_fit) > fit[old_best]:
            worst = int(np.argmax(new_fit))
            new[worst], new_s[worst] = pop[old_best], scheds[old_best]
        pop, scheds = new, new_s


def _run_ils(inst, params, rng, budget, tracker):
    x = _cbfs(inst, rng)
    sx = _evaluate(x, inst, budget)
    tracker.offer(x, sx)
    xp, sp = x, sx
    while not budget.exhausted():
        v, sv = local_search(xp, inst, budget, sched=sp)
        tracker.offer(v, sv)
        if sv.cmax <= sx.cmax:
            x, sx = v, sv
        xp, sp = perturb(x, params.p_hat, rng), None


def select_ts_move(moves: list[Move], kappa, tabu: np.ndarray, iteration: int, rng: np.random.Generator) -> Move:
    """Pick among non-tabu moves, or the least-tabu move when all are tabu.

    A move of op ``i`` is tabu while ``tabu[i, kappa[i]] > iteration``.
    """
    free = [mv for mv in moves if tabu[mv.op, kappa[mv.op]] <= iteration]
    if len(free) >= 2:
        two = sorted(free, key=lambda mv: mv.estimate)[:2]
        return two[int(rng.integers(2))]
    if free:
        return free[0]
    return min(moves, key=lambda mv: tabu[mv.op, kappa[mv.op]])


def _run_ts(inst, params, rng, budget, tracker, window: float | None = None):
    x = _cbfs(inst, rng)
    sched = _evaluate(x, inst, budget)
    tracker.offer(x, sched)
    tenure = tabu_tenure(params.lam, len(inst.nonfixed))
    tabu = np.zeros((inst.o + 1, inst.m + 1), dtype=np.int64)
    iteration = 0
    while not budget.exhausted():
        if window is not None and budget.clock() - tracker.last_improvement >= window:
            break
        iteration += 1
        moves = neighborhood(inst, sched, build_digraph(inst, sched))
        if not moves:
            break
        mv = select_ts_move(moves, sched.kappa, tabu, iteration, rng)
        tabu[mv.op, sched.kappa[mv.op]] = iteration + tenure
        x, sched = apply_move(inst, sched, mv)
        budget.charge()
        tracker.offer(x, sched)


def stagnation_window(inst: Instance, budget: Budget, override: float | None = None) -> float:
    """TS phase length without improvement: ``log10(o)`` seconds, or a decode count in eval mode."""
    if override is not None:
        return override
    lg = math.log10(max(inst.o, 1))
    return lg if budget.timed else float(max(20, math.ceil(200 * lg)))


def _run_tsde(inst, params, rng, budget, tracker):
    _run_ts(inst, params, rng, budget, tracker, stagnation_window(inst, budget, params.stagnation))
    pop, scheds = [tracker.x], [tracker.sched]
    for _ in range(params.n_size - 1):
        if budget.exhausted():
            return
        w, sw = local_search(perturb(tracker.x, params.p_hat, rng), inst, budget)
        tracker.offer(w, sw)
        pop.append(w)
        scheds.append(sw)
    _de(inst, params, rng, budget, tracker, pop, scheds)


_DRIVERS = {"DE": _run_de, "GA": _run_ga, "ILS": _run_ils, "TS": _run_ts, "TSDE": _run_tsde}


def solve(
    inst: Instance,
    params: SolverParams,
    rng: np.random.Generator | None = None,
    budget: Budget | None = None,
) -> Result:
    """Run ``params.method``; the rng defaults to the method's stream keyed by ``params.seed``."""
    params = params.resolve(inst)
    if rng is None:
        rng = make_rng(params.seed, STREAMS[params.method.lower()])
    if budget is None:
        budget = params.budget()
    tracker = _Tracker(budget)
    if not inst.nonfixed:
        x = np.empty(0)
        tracker.offer(x, _evaluate(x, inst, budget))
        return tracker.result(params.method)
    _DRIVERS[params.method](inst, params, rng, budget, tracker)
    return tracker.result(params.method)


def _with_method(params: SolverParams, method: str) -> SolverParams:
    return params if params.method == method else replace(params, method=method)


def run_de(inst, params, rng=None, budget=None) -> Result:
    return solve(inst, _with_method(params, "DE"), rng, budget)


def run_ga(inst, params, rng=None, budget=None) -> Result:
    return solve(inst, _with_method(params, "GA"), rng, budget)


def run_ils(inst, params, rng=None, budget=None) -> Result:
    return solve(inst, _with_method(params, "ILS"), rng, budget)


def run_ts(inst, params, rng=None, budget=None) -> Result:
    return solve(inst, _with_method(params, "TS"), rng, budget)


def run_tsde(inst, params, rng=None, budget=None) -> Result:
    return solve(inst, _with_method(params, "TSDE"), rng, budget)
