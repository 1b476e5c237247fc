"""Multi-label space-time A* (MLA*) for one agent and one multi-goal task.

A search state is ``(location, time, label)`` where ``label`` is the 1-based
index of the next goal to visit; ``label == K + 1`` means every goal has been
visited.  Moving (or waiting) into ``goals[label - 1]`` advances the label.
"""
from __future__ import annotations

import heapq
import math
import time as _time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .focal import _EPS
from .kernels import grid_bfs
from .model import GridMap, Path, Task

INF = math.inf
TIMEOUT_CHECK_EVERY = 10_000


class SearchTimeout(Exception):
    """Raised from inside a search when the solver deadline has passed."""


class VertexConstraint(NamedTuple):
    agent: int
    loc: tuple
    time: int


class EdgeConstraint(NamedTuple):
    agent: int
    u: tuple
    v: tuple
    time: int


class SearchState(NamedTuple):
    location: tuple
    time: int
    label: int


class ConstraintSet:
    """Constraints of one agent in lookup-friendly form."""

    __slots__ = ("vertex", "edge", "latest", "max_time")

    def __init__(self, constraints=(), agent: Optional[int] = None):
        self.vertex = set()
        self.edge = set()
        self.latest = {}
        self.max_time = -1
        for c in constraints:
            if agent is not None and c.agent != agent:
                continue
            if len(c) == 3:  # VertexConstraint
                self.vertex.add((c.loc, c.time))
                if c.time > self.latest.get(c.loc, -1):
                    self.latest[c.loc] = c.time
            else:
                self.edge.add((c.u, c.v, c.time))
            self.max_time = max(self.max_time, c.time)

    def latest_constraint_time(self, loc) -> int:
        return self.latest.get(loc, -1)

    def __len__(self):
        return len(self.vertex) + len(self.edge)


class SearchStats:
    """Mutable counters shared across searches of one solver run."""

    __slots__ = ("expanded", "deadline")

    def __init__(self, deadline: Optional[float] = None):
        self.expanded = 0
        self.deadline = deadline

    def tick(self, n: int):
        before = self.expanded
        self.expanded += n
        if (self.deadline is not None
                and before // TIMEOUT_CHECK_EVERY != self.expanded // TIMEOUT_CHECK_EVERY
                and _time.perf_counter() > self.deadline):
            raise SearchTimeout


@dataclass
class DistanceTable:
    """Shortest-path distances from every free cell to every goal location."""

    grid: GridMap
    dist: dict  # goal -> list of rows, INF where unreachable
    suffixes: dict  # task goals -> per-goal suffix sums
    heuristics: dict = field(default_factory=dict)  # task goals -> _Heuristic

    def distance(self, loc, goal) -> float:
        grid = self.dist.get(goal)
        if grid is None:
            grid = self.add_goal(goal)
        return grid[loc[0]][loc[1]]

    def add_goal(self, goal):
        self.dist[goal] = _bfs_rows(self.grid, goal)
        return self.dist[goal]

    def suffix(self, goals) -> list:
        """``suffix[k]`` = length of visiting goals[k], goals[k+1], ... in order, starting at goals[k]."""
        goals = tuple(goals)
        s = self.suffixes.get(goals)
        if s is None:
            s = [0] * len(goals)
            for k in range(len(goals) - 2, -1, -1):
                s[k] = s[k + 1] + self.distance(goals[k], goals[k + 1])
            self.suffixes[goals] = s
        return s

    def heuristic(self, task: Task) -> "_Heuristic":
        h = self.heuristics.get(task.goals)
        if h is None:
            h = self.heuristics[task.goals] = _Heuristic(task, self)
        return h


def _bfs_rows(grid: GridMap, goal):
    free = ~grid.blocked
    d = grid_bfs(free, grid.height, grid.width, grid.index(goal)).reshape(grid.height, grid.width)
    return [[x if x >= 0 else INF for x in row] for row in d.tolist()]


def precompute_goal_distances(grid: GridMap, tasks: Sequence[Task]) -> DistanceTable:
    table = DistanceTable(grid, {}, {})
    for task in tasks:
        for g in task.goals:
            if g not in table.dist:
                table.add_goal(g)
    for task in tasks:
        table.suffix(task.goals)
    return table


def initial_label(start, goals) -> int:
    return 2 if start == goals[0] else 1


def h_value(state: SearchState, task: Task, table: DistanceTable) -> float:
    """Length of the shortest walk from the state's location through all unvisited goals."""
    goals = task.goals
    k = state.label
    if k > len(goals):
        return table.distance(state.location, goals[-1])
    return table.distance(state.location, goals[k - 1]) + table.suffix(goals)[k - 1]


class _Heuristic:
    """Per-task h lookup: ``legs[k]`` and ``tails[k]`` indexed by 1-based label."""

    __slots__ = ("legs", "tails")

    def __init__(self, task: Task, table: DistanceTable):
        goals = task.goals
        suffix = table.suffix(goals)
        self.legs = [None] + [table.dist[g] if g in table.dist else table.add_goal(g) for g in goals]
        self.legs.append(self.legs[-1])
        self.tails = [0] + list(suffix) + [0]

    def __call__(self, loc, label):
        return self.legs[label][loc[0]][loc[1]] + self.tails[label]


def _reconstruct(parents, key):
    locs = []
    while key is not None:
        locs.append(key[0])
        key = parents[key]
    locs.reverse()
    return Path._from_tuples(tuple(locs))


def mla_star(grid: GridMap, start, task: Task, constraints: ConstraintSet,
             table: DistanceTable, horizon: int,
             stats: Optional[SearchStats] = None) -> Optional[Path]:
    """Time-optimal constrained path through ``task.goals`` in order, or None.

    Expansion order: f, then larger time, then larger label, then row-major
    location.  None means no path with finish time <= ``horizon`` exists.
    """
    goals = task.goals
    final = goals[-1]
    done = len(goals) + 1
    h = table.heuristic(task)
    legs, tails = h.legs, h.tails
    moves = grid.moves
    vcons, econs = constraints.vertex, constraints.edge
    park_after = constraints.latest_constraint_time(final)

    label0 = initial_label(start, goals)
    h0 = h(start, label0)
    if h0 == INF or h0 > horizon or (start, 0) in vcons:
        return None
    key0 = (start, 0, label0)
    parents = {key0: None}
    open_ = [(h0, 0, -label0, start[0], start[1])]
    push, pop = heapq.heappush, heapq.heappop
    expanded = 0
    try:
        while open_:
            f, nt, nl, r, c = pop(open_)
            t, label, loc = -nt, -nl, (r, c)
            expanded += 1
            if label == done and loc == final and t >= park_after:
                return _reconstruct(parents, (loc, t, label))
            t1 = t + 1
            if t1 > horizon:
                continue
            parent = (loc, t, label)
            want = goals[label - 1] if label < done else None
            for v in moves[loc]:
                if (v, t1) in vcons or (v != loc and (loc, v, t) in econs):
                    continue
                l1 = label + 1 if v == want else label
                key = (v, t1, l1)
                if key in parents:
                    continue
                f1 = t1 + legs[l1][v[0]][v[1]] + tails[l1]
                if f1 > horizon:
                    continue
                parents[key] = parent
                push(open_, (f1, -t1, -l1, v[0], v[1]))
        return None
    finally:
        if stats is not None:
            stats.tick(expanded)


class ConflictTable:
    """Occupancy of other agents' (padded) paths for collision counting."""

    def __init__(self, paths: Sequence[Path]):
        self.vertex = defaultdict(int)
        self.edge = defaultdict(int)
        self.parked = defaultdict(list)
        for p in paths:
            locs = p.locations
            for t, loc in enumerate(locs):
                self.vertex[(loc, t)] += 1
                if t + 1 < len(locs) and locs[t + 1] != loc:
                    self.edge[(loc, locs[t + 1], t)] += 1
            self.parked[locs[-1]].append(len(locs) - 1)

    def count(self, u, v, t) -> int:
        """Collisions caused by moving u (time t) -> v (time t + 1)."""
        n = self.vertex.get((v, t + 1), 0)
        for finish in self.parked.get(v, ()):
            if finish < t + 1:
                n += 1
        if u != v:
            n += self.edge.get((v, u, t), 0)
        return n


def mla_star_focal(grid: GridMap, start, task: Task, constraints: ConstraintSet,
                   table: DistanceTable, horizon: int, omega: float,
                   other_paths: Sequence[Path] = (),
                   stats: Optional[SearchStats] = None):
    """Focal MLA*: returns ``(path, lower_bound)`` with finish time <= omega * lower_bound, or None.

    FOCAL prefers states whose partial path collides least with ``other_paths``.
    """
    if omega < 1:
        raise ValueError("omega must be >= 1")
    goals = task.goals
    final = goals[-1]
    done = len(goals) + 1
    h = table.heuristic(task)
    legs, tails = h.legs, h.tails
    moves = grid.moves
    vcons, econs = constraints.vertex, constraints.edge
    park_after = constraints.latest_constraint_time(final)
    conflicts = ConflictTable(other_paths)

    label0 = initial_label(start, goals)
    h0 = h(start, label0)
    if h0 == INF or h0 > horizon or (start, 0) in vcons:
        return None
    key0 = (start, 0, label0)
    parents = {key0: None}
    best = {key0: 0}  # fewest collisions seen per state
    closed = set()
    # f values are integers and the smallest open f never decreases, so OPEN is
    # a count per f and FOCAL a heap fed from per-f buckets as the bound grows.
    live = defaultdict(int)
    live[h0] = 1
    waiting = defaultdict(list)
    f_min = h0
    bound = int(omega * f_min + _EPS)
    focal = [(0, h0, 0, -label0, start[0], start[1])]
    n_open = 1
    push, pop = heapq.heappush, heapq.heappop
    expanded = 0
    try:
        while n_open:
            while not live[f_min]:
                f_min += 1
            new_bound = int(omega * f_min + _EPS)
            if new_bound > bound:
                for f in range(bound + 1, new_bound + 1):
                    for e in waiting.pop(f, ()):
                        push(focal, e)
                bound = new_bound
            n, f, nt, nl, r, c = pop(focal)
            loc, t, label = (r, c), -nt, -nl
            key = (loc, t, label)
            if key in closed or best[key] != n:
                continue
            closed.add(key)
            live[f] -= 1
            n_open -= 1
            expanded += 1
            if label == done and loc == final and t >= park_after:
                return _reconstruct(parents, key), f_min
            t1 = t + 1
            if t1 > horizon:
                continue
            want = goals[label - 1] if label < done else None
            for v in moves[loc]:
                if (v, t1) in vcons or (v != loc and (loc, v, t) in econs):
                    continue
                l1 = label + 1 if v == want else label
                child = (v, t1, l1)
                if child in closed:
                    continue
                n1 = n + conflicts.count(loc, v, t)
                old = best.get(child)
                if old is not None and old <= n1:
                    continue
                f1 = t1 + legs[l1][v[0]][v[1]] + tails[l1]
                if f1 > horizon:
                    continue
                if old is None:
                    live[f1] += 1
                    n_open += 1
                best[child] = n1
                parents[child] = key
                e = (n1, f1, -t1, -l1, v[0], v[1])
                if f1 <= bound:
                    push(focal, e)
                else:
                    waiting[f1].append(e)
        return None
    finally:
        if stats is not None:
            stats.tick(expanded)
