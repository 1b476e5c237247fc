"""Constraint-forest search over task assignments (CBS-TA with MLA* low level).

Modes
-----
optimal    best-first on cost, new root with the next-best assignment on every root expansion
heuristic  as optimal, ordered by cost + h with h from CG, DG or WDG; cardinal collisions first
focal      bounded-suboptimal two-level focal search (ECBS-TA-MLA)
greedy     single root with the best assignment, no further roots (TA+CBS-MLA)
"""
from __future__ import annotations

import heapq
import itertools
import time as _time
from dataclasses import dataclass, field
from typing import Optional

from .assignment import AssignmentEnumerator, build_cost_matrix
from .heuristics import _RANK, HEURISTICS, HeuristicContext
from .mla import (ConstraintSet, EdgeConstraint, SearchStats, SearchTimeout, VertexConstraint,
                  mla_star, mla_star_focal, precompute_goal_distances)
from .model import Collision, Instance, Plan, find_collisions

MODES = ("optimal", "heuristic", "focal", "greedy")
ALGORITHMS = {"cbs-ta": "optimal", "cbsh-ta": "heuristic", "ecbs-ta": "focal", "ta-cbs": "greedy"}

SOLVED = "solved"
INFEASIBLE = "infeasible"
TIMEOUT = "timeout"


@dataclass
class SolverConfig:
    mode: str = "optimal"
    heuristic: str = "none"
    omega: float = 1.0
    time_limit: float = 60.0
    horizon: Optional[int] = None
    seed: int = 0
    wdg_budget_fraction: float = 0.1
    wdg_node_limit: int = 500

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.heuristic not in ("none", *HEURISTICS):
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.mode == "heuristic" and self.heuristic == "none":
            raise ValueError("heuristic mode needs cg, dg or wdg")
        if self.mode != "heuristic" and self.heuristic != "none":
            raise ValueError("heuristics only combine with the optimal (cbsh-ta) search")
        if self.mode != "focal" and self.omega != 1:
            raise ValueError("omega only applies to focal mode")

    @classmethod
    def for_algorithm(cls, algo: str, heuristic: str = "none", **kwargs) -> "SolverConfig":
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algo!r}")
        return cls(mode=ALGORITHMS[algo], heuristic=heuristic, **kwargs)


@dataclass
class SolveStats:
    ct_expanded: int = 0
    ct_generated: int = 0
    roots: int = 0
    ll_expanded: int = 0
    runtime_s: float = 0.0
    lower_bound: Optional[float] = None
    horizon: int = 0
    # "final-goal" (two tasks end at one cell), "assignment" (no finite assignment) or "horizon"
    infeasible_kind: Optional[str] = None
    subsolve_timeouts: int = 0

    def as_dict(self, runtime: bool = True) -> dict:
        d = dict(self.__dict__)
        if not runtime:
            d.pop("runtime_s")
        return d


@dataclass
class SolveResult:
    status: str
    plan: Optional[Plan]
    stats: SolveStats

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


@dataclass(eq=False)
class CTNode:
    root: bool
    assignment: tuple
    constraints: tuple
    paths: tuple
    cost: int
    collisions: list
    id: int
    h_val: int = 0
    lbs: tuple = ()
    lb: int = 0
    assignment_cost: int = 0
    parent: Optional[int] = None
    h_computed: bool = False
    spawned: bool = False
    classes: Optional[list] = field(default=None, repr=False)

    @property
    def f_val(self):
        return self.cost + self.h_val

    @property
    def num_collisions(self) -> int:
        return len(self.collisions)


def default_horizon(instance: Instance) -> int:
    free = len(instance.grid.free_cells)
    return free * (sum(len(t) for t in instance.tasks) + instance.num_agents)


def choose_collision(node: CTNode, mode: str, classify=None) -> Collision:
    """Earliest collision; in heuristic mode cardinal before semi-cardinal before non-cardinal."""
    if mode != "heuristic":
        return node.collisions[0]
    if node.classes is None:
        node.classes = [classify(node, c) for c in node.collisions]
    best = min(range(len(node.collisions)),
               key=lambda k: (_RANK[node.classes[k]], node.collisions[k].sort_key()))
    return node.collisions[best]


def split_constraints(collision: Collision):
    """The two constraints that resolve a collision, one per involved agent."""
    i, j = collision.agents
    if collision.kind == "vertex":
        return (VertexConstraint(i, collision.loc, collision.time),
                VertexConstraint(j, collision.loc, collision.time))
    return (EdgeConstraint(i, collision.loc, collision.loc2, collision.time),
            EdgeConstraint(j, collision.loc2, collision.loc, collision.time))


class _Deadline(Exception):
    pass


class Solver:
    """One search run; holds OPEN/FOCAL, the assignment ranking and counters."""

    def __init__(self, instance: Instance, config: Optional[SolverConfig] = None):
        self.instance = instance
        self.config = config or SolverConfig()
        self.mode = self.config.mode
        self.horizon = self.config.horizon if self.config.horizon is not None else default_horizon(instance)
        self.stats = SolveStats(horizon=self.horizon)
        self.deadline = None
        self.search_stats = SearchStats()
        self.table = precompute_goal_distances(instance.grid, instance.tasks)
        self.cost_matrix = build_cost_matrix(instance, self.table)
        self.enumerator = None
        self._ids = itertools.count()
        self.lb_history = []
        self.record_nodes = False
        self.expanded_nodes = []
        self.hctx = None

    # ------------------------------------------------------------------ nodes

    def _plan(self, agent, task_id, constraints, others=()):
        """Replan one agent; returns (path, lower bound) or None."""
        inst = self.instance
        cs = ConstraintSet(constraints, agent)
        if self.mode == "focal":
            return mla_star_focal(inst.grid, inst.starts[agent], inst.tasks[task_id], cs,
                                  self.table, self.horizon, self.config.omega, others,
                                  self.search_stats)
        path = mla_star(inst.grid, inst.starts[agent], inst.tasks[task_id], cs,
                        self.table, self.horizon, self.search_stats)
        return None if path is None else (path, path.finish_time)

    def make_root(self, assignment) -> Optional[CTNode]:
        paths, lbs = [], []
        for agent, task_id in enumerate(assignment.tasks):
            found = self._plan(agent, task_id, (), paths)
            if found is None:
                return None
            paths.append(found[0])
            lbs.append(found[1])
        node = self._node(True, assignment.tasks, (), tuple(paths), tuple(lbs), None)
        node.assignment_cost = assignment.cost
        self.stats.roots += 1
        return node

    def _node(self, root, assignment, constraints, paths, lbs, parent):
        node = CTNode(root=root, assignment=assignment, constraints=constraints, paths=paths,
                      cost=sum(p.finish_time for p in paths), collisions=find_collisions(paths),
                      id=next(self._ids), lbs=lbs, lb=sum(lbs), parent=parent)
        self.stats.ct_generated += 1
        return node

    def child(self, node: CTNode, constraint) -> Optional[CTNode]:
        agent = constraint.agent
        constraints = node.constraints + (constraint,)
        others = node.paths[:agent] + node.paths[agent + 1:]
        found = self._plan(agent, node.assignment[agent], constraints, others)
        if found is None:
            return None
        path, lb = found
        paths = node.paths[:agent] + (path,) + node.paths[agent + 1:]
        lbs = node.lbs
        if self.mode == "focal":
            lbs = lbs[:agent] + (max(lbs[agent], lb),) + lbs[agent + 1:]
        else:
            lbs = tuple(p.finish_time for p in paths)
        child = self._node(False, node.assignment, constraints, paths, lbs, node.id)
        child.assignment_cost = node.assignment_cost
        if self.mode == "heuristic":
            # pathmax: the parent's f bounds every solution below it
            child.h_val = max(0, node.f_val - child.cost)
        return child

    def next_root(self) -> Optional[CTNode]:
        """Root for the next-best assignment that admits paths within the horizon."""
        while True:
            assignment = self.enumerator.next()
            if assignment is None:
                return None
            root = self.make_root(assignment)
            if root is not None:
                return root

    def expand(self, node: CTNode):
        """Children of ``node`` and, for a root not yet expanded, the next root."""
        new_root = None
        if node.root and not node.spawned and self.mode != "greedy":
            node.spawned = True
            new_root = self.next_root()
        collision = choose_collision(node, self.mode, self._classify)
        children = []
        for constraint in split_constraints(collision):
            child = self.child(node, constraint)
            if child is not None:
                children.append(child)
        return children, new_root

    def _classify(self, node, collision):
        return self.hctx.classify(node, collision)

    def compute_h(self, node: CTNode) -> int:
        if not node.collisions:
            return 0
        return HEURISTICS[self.config.heuristic](node, self.hctx)

    # ------------------------------------------------------------------ search

    def _check_time(self):
        if self.deadline is not None and _time.perf_counter() > self.deadline:
            raise _Deadline

    def _result(self, status, node=None):
        self.stats.ll_expanded = self.search_stats.expanded
        if self.hctx is not None:
            self.stats.subsolve_timeouts = self.hctx.subsolve_timeouts
        plan = None
        if node is not None:
            plan = Plan(node.assignment, node.paths)
        return SolveResult(status, plan, self.stats)

    def solve(self) -> SolveResult:
        started = _time.perf_counter()
        self.deadline = started + self.config.time_limit if self.config.time_limit else None
        self.search_stats.deadline = self.deadline
        if self.mode == "heuristic":
            budget = self.config.wdg_budget_fraction * (self.config.time_limit or 60.0)
            inst = self.instance
            self.hctx = HeuristicContext(inst.grid, inst.starts, inst.tasks, self.table,
                                         self.horizon, self.search_stats, self.deadline,
                                         budget, self.config.wdg_node_limit)
        try:
            result = self._search()
        except (_Deadline, SearchTimeout):
            result = self._result(TIMEOUT)
        result.stats.runtime_s = _time.perf_counter() - started
        return result

    def _first_root(self):
        self.enumerator = AssignmentEnumerator(self.cost_matrix)
        best = self.enumerator.best
        if best is None:
            self.stats.infeasible_kind = "assignment"
            return None
        root = self.make_root(best)
        if root is None and self.mode != "greedy":
            root = self.next_root()
        return root

    def _search(self) -> SolveResult:
        finals = [t.final for t in self.instance.tasks]
        if len(set(finals)) < len(finals):
            # both agents would have to occupy the shared cell forever
            self.stats.infeasible_kind = "final-goal"
            return self._result(INFEASIBLE)
        root = self._first_root()
        if root is None:
            self.stats.infeasible_kind = self.stats.infeasible_kind or "horizon"
            return self._result(INFEASIBLE)
        if self.mode == "focal":
            return self._focal_search(root)
        return self._best_first(root)

    def _best_first(self, root: CTNode) -> SolveResult:
        heuristic = self.mode == "heuristic"
        open_ = []

        def push(n):
            key = n.f_val if heuristic else n.cost
            heapq.heappush(open_, (key, n.num_collisions, n.id, n))

        push(root)
        while open_:
            self._check_time()
            key, _, _, node = heapq.heappop(open_)
            self.stats.lower_bound = key if self.stats.lower_bound is None else max(self.stats.lower_bound, key)
            if not node.collisions:
                self.stats.lower_bound = node.cost
                return self._result(SOLVED, node)
            if heuristic and not node.h_computed:
                if node.root and not node.spawned:
                    node.spawned = True
                    new_root = self.next_root()
                    if new_root is not None:
                        push(new_root)
                node.h_computed = True
                h = self.compute_h(node)
                if h > node.h_val:
                    node.h_val = h
                    if node.f_val > key:
                        push(node)
                        continue
            children, new_root = self.expand(node)
            self.stats.ct_expanded += 1
            if self.record_nodes:
                self.expanded_nodes.append(node)
            if new_root is not None:
                push(new_root)
            for c in children:
                push(c)
        self.stats.infeasible_kind = "horizon"
        return self._result(INFEASIBLE)

    def _focal_search(self, root: CTNode) -> SolveResult:
        from .focal import FocalQueue

        queue = FocalQueue(self.config.omega)

        def push(n):
            queue.push(n, n.lb, n.cost, (n.num_collisions, n.cost, n.id))

        push(root)
        while len(queue):
            self._check_time()
            node, _, _, lb_min = queue.pop()
            self.lb_history.append(lb_min)
            self.stats.lower_bound = lb_min
            if not node.collisions:
                return self._result(SOLVED, node)
            children, new_root = self.expand(node)
            self.stats.ct_expanded += 1
            if self.record_nodes:
                self.expanded_nodes.append(node)
            if new_root is not None:
                push(new_root)
            for c in children:
                push(c)
        self.stats.infeasible_kind = "horizon"
        return self._result(INFEASIBLE)


def solve(instance: Instance, config: Optional[SolverConfig] = None) -> SolveResult:
    """Solve an instance under ``config`` (optimal CBS-TA-MLA by default)."""
    return Solver(instance, config).solve()
