"""Optimal and bounded-suboptimal multi-goal task assignment and path finding."""
from .assignment import AssignmentEnumerator, best_assignment, build_cost_matrix
from .formats import (FormatError, format_solution, parse_map, parse_scenario, parse_solution,
                      write_map, write_scenario, write_solution)
from .highlevel import SolveResult, SolverConfig, SolveStats, solve
from .instances import builtin_map, generate_instance, random_grid
from .mla import (ConstraintSet, EdgeConstraint, VertexConstraint, mla_star, mla_star_focal,
                  precompute_goal_distances)
from .model import (Collision, GridMap, Instance, Path, Plan, Task, ValidationReport,
                    find_collisions, validate_solution)
from .oracle import oracle_solve

__version__ = "0.1.0"

__all__ = [
    "AssignmentEnumerator", "Collision", "ConstraintSet", "EdgeConstraint", "FormatError",
    "GridMap", "Instance", "Path", "Plan", "SolveResult", "SolveStats", "SolverConfig", "Task",
    "ValidationReport", "VertexConstraint", "best_assignment", "build_cost_matrix",
    "builtin_map", "find_collisions", "format_solution", "generate_instance", "mla_star",
    "mla_star_focal", "oracle_solve", "parse_map", "parse_scenario", "parse_solution",
    "precompute_goal_distances", "random_grid", "solve", "validate_solution", "write_map",
    "write_scenario", "write_solution",
]
