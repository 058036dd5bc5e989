import math

import numpy as np
import pytest

from opsched.budget import Budget
from opsched.decoder import evaluate, schedule_violations
from opsched.generator import GeneratorParams, generate_instance
from opsched.instance import Instance, OperationSpec
from opsched.local_search import Move
from opsched.metaheuristics import (
    UPPER,
    SolverParams,
    cbfs_initial,
    cbfs_order,
    de_indices,
    de_mutant,
    de_trial,
    ga_crossover,
    ga_mutate,
    perturb,
    run_de,
    run_ga,
    run_ils,
    run_ts,
    run_tsde,
    select_ts_move,
    solve,
    stagnation_window,
    tabu_tenure,
)
from opsched.rng import make_rng
from fixtures import example_instance
from oracles import micro_instance

METHODS = ["DE", "GA", "ILS", "TS", "TSDE"]


def rng(seed=0):
    return np.random.default_rng(seed)


def medium_instance():
    return generate_instance(GeneratorParams(4, 3, 6, 3, 4, 2, seed=8))


def test_tenure():
    assert tabu_tenure(1.2, 100) == 26
    assert tabu_tenure(1.2, 100) == math.ceil(1.2 * math.log(100) ** 2)
    assert tabu_tenure(1.2, 1) == 0


def test_params_validation():
    with pytest.raises(ValueError):
        SolverParams(method="DE", n_size=3)
    with pytest.raises(ValueError):
        SolverParams(method="GA", n_size=7)
    with pytest.raises(ValueError):
        SolverParams(zeta=0)
    with pytest.raises(ValueError):
        SolverParams(p_cro=1.5)
    with pytest.raises(ValueError):
        SolverParams(lam=2.5)
    with pytest.raises(ValueError):
        SolverParams(method="SA")
    with pytest.raises(ValueError):
        SolverParams(variant="best2")
    inst = micro_instance(1)
    with pytest.raises(ValueError):
        SolverParams(method="ILS", p_hat=2 * len(inst.nonfixed) + 1).resolve(inst)
    with pytest.raises(ValueError):
        SolverParams().budget()


def test_family_defaults():
    small = SolverParams().resolve(micro_instance(1))
    assert (small.zeta, small.p_mut) == (0.7, 0.36)
    big = Instance(1, 1, tuple(OperationSpec(1, {1: 1}) for _ in range(201)))
    resolved = SolverParams().resolve(big)
    assert (resolved.zeta, resolved.p_mut) == (0.1, 0.11)
    assert SolverParams(zeta=0.5).resolve(big).zeta == 0.5


def test_cbfs_fastest_machine():
    inst = Instance(1, 2, (OperationSpec(1, {1: 4, 2: 3}),))
    x = cbfs_initial(inst, [0.3])
    assert evaluate(x, inst).kappa[1] == 2


def test_cbfs_machine_tie_goes_to_smaller():
    inst = Instance(1, 3, (OperationSpec(1, {2: 3, 3: 3}),))
    assert evaluate(cbfs_initial(inst, [0.3]), inst).kappa[1] == 2


def test_cbfs_chain_ignores_costs():
    ops = tuple(OperationSpec(1, {1: 2}) for _ in range(4))
    inst = Instance(1, 1, ops, ((1, 2), (2, 3), (3, 4)))
    for costs in ([0.9, 0.1, 0.5, 0.0], [0.0, 0.0, 0.0, 0.0]):
        assert cbfs_order(inst, costs) == [1, 2, 3, 4]
        assert evaluate(cbfs_initial(inst, costs), inst).sigma == (1, 2, 3, 4)


def test_cbfs_is_breadth_first():
    # 1 -> 3 and 2 -> 4: layer {1, 2} first, then {3, 4}, each by cost
    ops = tuple(OperationSpec(1, {1: 2}) for _ in range(4))
    inst = Instance(1, 1, ops, ((1, 3), (2, 4)))
    assert cbfs_order(inst, [0.5, 0.1, 0.0, 0.9]) == [2, 1, 3, 4]


def test_cbfs_output_is_feasible():
    for seed in range(50):
        inst = micro_instance(seed)
        x = cbfs_initial(inst, rng(seed).random(inst.o))
        assert schedule_violations(inst, evaluate(x, inst)) == []


def test_de_mutant_arithmetic():
    a, b, c = np.array([0.4]), np.array([0.8]), np.array([0.2])
    assert de_mutant(a, b, c, 0.5)[0] == pytest.approx(0.7)
    same = np.array([0.3, 0.6])
    assert list(de_mutant(np.array([0.1, 0.95]), same, same, 0.7)) == [0.1, 0.95]
    clipped = de_mutant(np.array([0.9, 0.1]), np.array([1.0, 0.0]), np.array([0.0, 1.0]), 1.0)
    assert list(clipped) == [UPPER, 0.0]


def test_de_trial_without_crossover_changes_one_gene():
    x = np.zeros(10)
    v = np.ones(10)
    for seed in range(20):
        u = de_trial(x, v, 0.0, rng(seed))
        assert int(u.sum()) == 1


def test_de_indices():
    r = rng(1)
    for i in range(8):
        r1, r2, r3 = de_indices(i, 8, "rand1", [0] * 8, r)
        assert len({i, r1, r2, r3}) == 4
    fitness = [5, 3, 3, 9]
    for i in range(4):
        r1, r2, r3 = de_indices(i, 4, "best1", fitness, r)
        assert r1 == 1
        assert len({r1, r2, r3}) == 3 and i not in (r2, r3)


def test_ga_operators():
    a = np.arange(6) / 10
    c1, c2 = ga_crossover(a, a.copy(), rng())
    assert list(c1) == list(a) and list(c2) == list(a)
    b = np.ones(6) * 0.9
    c1, c2 = ga_crossover(a, b, rng())
    assert all({x, y} == {p, q} for x, y, p, q in zip(c1, c2, a, b))
    y = a.copy()
    assert not any(ga_mutate(y, 0.0, rng(s)) for s in range(20))
    assert list(y) == list(a)
    assert ga_mutate(y, 1.0, rng())
    assert int((y != a).sum()) == 1


def test_perturb_changes_exactly_p_hat_positions():
    x = np.full(12, 0.5)
    for p_hat in (1, 2, 12):
        assert int((perturb(x, p_hat, rng(p_hat)) != x).sum()) == p_hat


def test_ts_selection_rules():
    kappa = (0, 1, 1, 2)
    moves = [Move(1, 2, 0, 10), Move(2, 2, 0, 7), Move(3, 1, 0, 8)]
    tabu = np.zeros((4, 3), dtype=int)
    picks = {select_ts_move(moves, kappa, tabu, 1, rng(s)).op for s in range(40)}
    assert picks == {2, 3}
    tabu[2, 1] = 5  # moving op 2 off machine 1 is tabu until iteration 5
    picks = {select_ts_move(moves, kappa, tabu, 1, rng(s)).op for s in range(40)}
    assert picks == {1, 3}
    tabu[3, 2] = 4
    assert select_ts_move(moves, kappa, tabu, 1, rng()).op == 1
    tabu[1, 1] = 9
    # all tabu: the least recently forbidden action wins
    assert select_ts_move(moves, kappa, tabu, 1, rng()).op == 3
    # tabu status lapses once the iteration reaches the recorded value
    assert select_ts_move(moves, kappa, tabu, 5, rng()).op in (2, 3)


def test_stagnation_window():
    inst_1000 = Instance(1, 1, tuple(OperationSpec(1, {1: 1}) for _ in range(1000)))
    assert stagnation_window(inst_1000, Budget(deadline=0.0)) == pytest.approx(3.0)
    inst_100 = Instance(1, 1, tuple(OperationSpec(1, {1: 1}) for _ in range(100)))
    assert stagnation_window(inst_100, Budget(deadline=0.0)) == pytest.approx(2.0)
    assert stagnation_window(inst_100, Budget(max_evals=10)) == 400.0
    assert stagnation_window(inst_100, Budget(max_evals=10), 7.0) == 7.0


@pytest.mark.parametrize("method", METHODS)
def test_methods_feasible_and_reproducible(method):
    inst = micro_instance(77, max_ops=8)
    p = SolverParams(method=method, max_evals=150, seed=3)
    a, b = solve(inst, p), solve(inst, p)
    assert a.makespan == b.makespan
    assert list(a.x) == list(b.x)
    assert schedule_violations(inst, a.schedule) == []
    assert evaluate(a.x, inst).cmax == a.makespan
    bests = [h[2] for h in a.history]
    assert all(x > y for x, y in zip(bests, bests[1:]))
    assert a.history[-1][2] == a.makespan


def test_run_wrappers_force_method():
    inst = micro_instance(5)
    p = SolverParams(method="TS", max_evals=40)
    assert run_de(inst, p).method == "DE"
    assert run_ga(inst, p).method == "GA"
    assert run_ils(inst, p).method == "ILS"
    assert run_ts(inst, p).method == "TS"
    assert run_tsde(inst, p).method == "TSDE"


def test_wall_clock_budget():
    inst = example_instance()
    res = solve(inst, SolverParams(method="TSDE", time_limit=0.3))
    assert res.seconds < 2.0
    assert schedule_violations(inst, res.schedule) == []


def test_all_fixed_instance():
    from opsched.instance import FixedAssignment

    inst = Instance(1, 1, (OperationSpec(1, {1: 3}),), (), (), None, (FixedAssignment(1, 1, 2),))
    res = solve(inst, SolverParams(max_evals=5))
    assert res.makespan == 5 and len(res.x) == 0


def test_de_population_never_worsens(monkeypatch):
    import opsched.metaheuristics as mh

    snapshots = []
    real_de = mh._de

    def recording_de(inst, params, r, budget, tracker, pop, scheds):
        class Watch(list):
            def __setitem__(self, i, v):
                snapshots.append(sorted(s.cmax for s in self))
                super().__setitem__(i, v)

        watched = Watch(scheds)
        real_de(inst, params, r, budget, tracker, pop, watched)
        snapshots.append(sorted(s.cmax for s in watched))

    monkeypatch.setattr(mh, "_de", recording_de)
    solve(medium_instance(), SolverParams(method="DE", max_evals=300, seed=1))
    assert len(snapshots) > 1
    for before, after in zip(snapshots, snapshots[1:]):
        assert all(b >= a for b, a in zip(before, after))


def test_ga_best_never_worsens(monkeypatch):
    import opsched.metaheuristics as mh

    bests = []
    real_argmin = mh.np.argmin

    class NP:
        def __getattr__(self, name):
            return getattr(np, name)

        @staticmethod
        def argmin(values):
            bests.append(min(values))
            return real_argmin(values)

    monkeypatch.setattr(mh, "np", NP())
    solve(medium_instance(), SolverParams(method="GA", max_evals=300, seed=2))
    assert len(bests) > 1
    assert all(a >= b for a, b in zip(bests, bests[1:]))


def test_ils_incumbent_non_increasing(monkeypatch):
    import opsched.metaheuristics as mh

    seen = []
    real = mh.perturb

    def spy(x, p_hat, r):
        seen.append(evaluate(x, inst).cmax)
        return real(x, p_hat, r)

    monkeypatch.setattr(mh, "perturb", spy)
    inst = micro_instance(99, max_ops=8)
    solve(inst, SolverParams(method="ILS", max_evals=200, seed=4))
    assert len(seen) > 1
    assert all(a >= b for a, b in zip(seen, seen[1:]))


def test_tsde_not_worse_than_its_ts_phase():
    inst = micro_instance(55, max_ops=8)
    ts = solve(inst, SolverParams(method="TS", max_evals=60, seed=1), rng=make_rng(1, "tsde"))
    tsde = solve(inst, SolverParams(method="TSDE", max_evals=300, seed=1, stagnation=1e9))
    assert tsde.makespan <= ts.makespan
