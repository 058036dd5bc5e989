import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from opsched import decoder  # noqa: E402
from opsched.graph import build_digraph, longest_path_value  # noqa: E402

GRAPH_CHECKS = {"count": 0}


def check_graph(inst, sched) -> None:
    """Longest path equals the makespan and critical nodes satisfy c + t = C_max."""
    g = build_digraph(inst, sched)
    assert longest_path_value(g) == sched.cmax, "longest path differs from makespan"
    for v in g.path[1:-1]:
        assert sched.c[v] + g.t[v] == sched.cmax, f"critical node {v}: c + t != C_max"
    GRAPH_CHECKS["count"] += 1


@pytest.fixture(autouse=True)
def graph_consistency(monkeypatch):
    """Every schedule decoded during a test goes through :func:`check_graph`."""
    original = decoder.build_schedule

    def checked(inst, asg, seq):
        sched = original(inst, asg, seq)
        check_graph(inst, sched)
        return sched

    monkeypatch.setattr(decoder, "build_schedule", checked)
    yield
