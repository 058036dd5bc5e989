"""Scheduling toolkit for flexible job shops with printing-shop constraints."""

from .budget import Budget
from .decoder import FixedSetupWarning, Schedule, build_schedule, evaluate, makespan, schedule_violations
from .encoding import Assignment, SequenceOrder, decode, reencode
from .generator import GeneratorParams, generate_instance, lops2_params
from .graph import SolutionDigraph, build_digraph, longest_path_value
from .instance import (
    FixedAssignment,
    Instance,
    InstanceError,
    InstanceFormatError,
    InstanceValidationError,
    OperationSpec,
    SetupTable,
    load_instance,
    parse_instance,
    serialize_instance,
    validate_instance,
)
from .local_search import local_search, neighborhood
from .metaheuristics import Result, SolverParams, cbfs_initial, solve, tabu_tenure
from .rng import make_rng

__version__ = "0.1.0"
