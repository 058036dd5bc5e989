import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from opsched.decoder import evaluate
from opsched.graph import (
    build_digraph,
    critical_path,
    digraph_text,
    heads,
    longest_path_value,
    path_weight,
    tail_times_dp,
    topological_order,
)
from opsched.instance import Instance, OperationSpec
from fixtures import example_genotype, example_instance, single_op
from oracles import micro_instance


def random_schedule(seed, xseed):
    inst = micro_instance(seed)
    x = np.random.default_rng(xseed).random(2 * len(inst.nonfixed))
    return inst, evaluate(x, inst)


def test_single_op_graph():
    inst = single_op(7)
    sched = evaluate([0.5, 0.5], inst)
    g = build_digraph(inst, sched)
    assert g.node_w[1] == 7
    assert longest_path_value(g) == 7
    assert g.path == [0, 1, 2]
    assert g.t[1] == 0


def test_node_weight_without_delay_is_p():
    inst = Instance(1, 1, (OperationSpec(1, {1: 3}), OperationSpec(1, {1: 4})), ((1, 2),))
    sched = evaluate([0.5, 0.5, 0.1, 0.2], inst)
    g = build_digraph(inst, sched)
    assert g.node_w[1:3] == [3, 4]


def test_machine_arcs_of_example():
    inst = example_instance()
    g = build_digraph(inst, evaluate(example_genotype(), inst))
    for a, b in [(2, 14), (14, 6), (6, 9)]:
        assert b in g.succ[a]
    assert g.succ[9][g.sink] == 0


def test_parallel_arcs_keep_larger_weight():
    # 1 -> 2 is both a precedence arc (weight 0) and a machine arc (weight = setup 3)
    from opsched.instance import SetupTable

    ops = (OperationSpec(1, {1: 2}), OperationSpec(1, {1: 2}))
    setup = SetupTable.for_operations(1, ops)
    setup.set(1, 1, 2, 3)
    inst = Instance(1, 1, ops, ((1, 2),), (), setup)
    g = build_digraph(inst, evaluate([0.5, 0.5, 0.1, 0.2], inst))
    assert g.weight(1, 2) == 3


def test_text_dump():
    inst = single_op(7)
    text = digraph_text(build_digraph(inst, evaluate([0.5, 0.5], inst)))
    assert "0 1 0" in text.splitlines()
    assert "1 2 0" in text.splitlines()


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 2**32 - 1))
def test_heads_are_completion_times(seed, xseed):
    inst, sched = random_schedule(seed, xseed)
    g = build_digraph(inst, sched)
    topological_order(g)  # raises on a cycle
    h = heads(g)
    assert h[1 : inst.o + 1] == sched.c[1:]
    assert h[g.sink] == sched.cmax


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 2**32 - 1))
def test_tails_two_ways_and_critical_path(seed, xseed):
    inst, sched = random_schedule(seed, xseed)
    g = build_digraph(inst, sched)
    assert g.t == tail_times_dp(g)
    assert path_weight(g, g.path) == longest_path_value(g) == sched.cmax
    assert critical_path(g) == g.path
    for v in g.path[1:-1]:
        assert sched.c[v] + g.t[v] == sched.cmax


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 2**32 - 1))
def test_tails_monotone_along_paths(seed, xseed):
    inst, sched = random_schedule(seed, xseed)
    g = build_digraph(inst, sched)
    reach = {v: set() for v in range(g.o + 2)}
    for v in reversed(topological_order(g)):
        for b in g.succ[v]:
            reach[v] |= {b} | reach[b]
    for i in range(1, inst.o + 1):
        for j in reach[i]:
            if j <= inst.o:
                assert g.t[i] >= g.t[j]
