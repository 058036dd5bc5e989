"""Small hand-built instances shared by several test modules."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from opsched.instance import FixedAssignment, Instance, OperationSpec

# Worked example: 16 operations in two jobs, 4 machines, ops 1 and 11 fixed.
EXAMPLE_ARCS = (
    (1, 2), (2, 3), (2, 4), (2, 5), (3, 6), (5, 7), (6, 8), (7, 9),
    (10, 15), (11, 13), (12, 14), (13, 15), (14, 15), (15, 16),
)
EXAMPLE_K = {
    2: (1, 2), 3: (3, 4), 4: (2, 4), 5: (2, 4), 6: (1, 2), 7: (1, 3), 8: (3, 4),
    9: (1, 2), 10: (3, 4), 12: (1, 3), 13: (1, 3), 14: (1, 2), 15: (2, 4), 16: (1, 3),
}
EXAMPLE_PI = (0.05, 0.79, 0.48, 0.26, 0.17, 0.53, 0.99, 0.09, 0.95, 0.63, 0.52, 0.02, 0.31, 0.62)
EXAMPLE_SIGMA = (0.05, 0.55, 0.95, 0.51, 0.75, 0.54, 0.00, 0.99, 0.15, 0.15, 0.16, 0.11, 0.79, 0.55)
EXAMPLE_KAPPA = {2: 1, 3: 4, 4: 2, 5: 2, 6: 1, 7: 3, 8: 4, 9: 1, 10: 4, 12: 3, 13: 3, 14: 1, 15: 2, 16: 3}
EXAMPLE_ORDER = (2, 10, 12, 14, 13, 5, 7, 3, 6, 8, 15, 16, 4, 9)
EXAMPLE_PHI = ((2, 14, 6, 9), (5, 15, 4), (12, 13, 7, 16), (10, 3, 8))


def example_instance(fixed_starts: tuple[int, int] = (40, 60)) -> Instance:
    """The worked example with made-up processing times (op id + machine)."""
    ops = []
    for i in range(1, 17):
        job = 1 if i <= 9 else 2
        if i == 1:
            machines = {3: 4}
        elif i == 11:
            machines = {2: 5}
        else:
            machines = {k: i % 7 + k for k in EXAMPLE_K[i]}
        ops.append(OperationSpec(job, machines))
    fixed = (FixedAssignment(1, 3, fixed_starts[0]), FixedAssignment(11, 2, fixed_starts[1]))
    return Instance(2, 4, tuple(ops), EXAMPLE_ARCS, (), None, fixed)


def example_genotype() -> np.ndarray:
    return np.array(EXAMPLE_PI + EXAMPLE_SIGMA)


def single_op(p: int = 5, periods=(), release: int = 0, theta=Fraction(1)) -> Instance:
    return Instance(1, 1, (OperationSpec(1, {1: p}, release, theta),), (), (tuple(periods),))


def two_machine_chain() -> Instance:
    """Three independent ops; all start on machine 1 unless moved."""
    ops = (
        OperationSpec(1, {1: 4, 2: 4}),
        OperationSpec(2, {1: 4, 2: 4}),
        OperationSpec(3, {1: 4, 2: 4}),
    )
    return Instance(3, 2, ops)
