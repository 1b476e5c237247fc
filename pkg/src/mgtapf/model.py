"""Instances, paths, plans, collision detection and the plan validator."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .kernels import scan_collisions

Location = tuple  # (row, col)
_SHIFT = 32

_MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True, eq=False)
class GridMap:
    """4-connected grid; ``blocked[r, c]`` marks obstacles."""

    blocked: np.ndarray

    def __post_init__(self):
        blocked = np.array(self.blocked, dtype=bool)
        if blocked.ndim != 2 or blocked.shape[0] < 1 or blocked.shape[1] < 1:
            raise ValueError("grid must be a non-empty 2-D array")
        blocked.setflags(write=False)
        object.__setattr__(self, "blocked", blocked)

    @classmethod
    def open(cls, height: int, width: int) -> "GridMap":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def height(self) -> int:
        return self.blocked.shape[0]

    @property
    def width(self) -> int:
        return self.blocked.shape[1]

    @property
    def size(self) -> int:
        return self.blocked.size

    def __eq__(self, other):
        return isinstance(other, GridMap) and np.array_equal(self.blocked, other.blocked)

    def __hash__(self):
        return hash((self.blocked.shape, self.blocked.tobytes()))

    def in_bounds(self, loc: Location) -> bool:
        r, c = loc
        return 0 <= r < self.height and 0 <= c < self.width

    def is_free(self, loc: Location) -> bool:
        return self.in_bounds(loc) and not self.blocked[loc[0], loc[1]]

    def index(self, loc: Location) -> int:
        return loc[0] * self.width + loc[1]

    def location(self, index: int) -> Location:
        return divmod(int(index), self.width)

    @cached_property
    def free_cells(self) -> tuple:
        rows, cols = np.nonzero(~self.blocked)
        return tuple(zip(rows.tolist(), cols.tolist()))

    @cached_property
    def adjacency(self) -> dict:
        """Free cell -> tuple of free 4-neighbours (up, down, left, right)."""
        adj = {}
        for r, c in self.free_cells:
            adj[(r, c)] = tuple(
                (r + dr, c + dc) for dr, dc in _MOVES if self.is_free((r + dr, c + dc))
            )
        return adj

    @cached_property
    def moves(self) -> dict:
        """Free cell -> its neighbours followed by the cell itself (wait)."""
        return {loc: nbrs + (loc,) for loc, nbrs in self.adjacency.items()}


def neighbors(grid: GridMap, loc: Location) -> set:
    """Free 4-neighbours of a free cell."""
    loc = tuple(loc)
    if not grid.is_free(loc):
        raise ValueError(f"location {loc} is blocked or outside the map")
    return set(grid.adjacency[loc])


@dataclass(frozen=True)
class Task:
    goals: tuple

    def __post_init__(self):
        goals = tuple(tuple(g) for g in self.goals)
        if not goals:
            raise ValueError("a task needs at least one goal")
        object.__setattr__(self, "goals", goals)

    def __len__(self):
        return len(self.goals)

    @property
    def final(self) -> Location:
        return self.goals[-1]


@dataclass(frozen=True)
class Instance:
    grid: GridMap
    starts: tuple
    tasks: tuple

    def __post_init__(self):
        starts = tuple(tuple(s) for s in self.starts)
        tasks = tuple(t if isinstance(t, Task) else Task(t) for t in self.tasks)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "tasks", tasks)
        if len(starts) != len(tasks):
            raise ValueError(f"{len(starts)} starts but {len(tasks)} tasks")
        if not starts:
            raise ValueError("at least one agent required")
        if len(set(starts)) != len(starts):
            raise ValueError("start locations must be pairwise distinct")
        for s in starts:
            if not self.grid.is_free(s):
                raise ValueError(f"start {s} is blocked or outside the map")
        for task in tasks:
            for g in task.goals:
                if not self.grid.is_free(g):
                    raise ValueError(f"goal {g} is blocked or outside the map")

    @property
    def num_agents(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class Path:
    """Locations at t = 0..finish_time; the agent stays at the last one afterwards."""

    locations: tuple

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(tuple(x) for x in self.locations))

    @classmethod
    def _from_tuples(cls, locations: tuple) -> "Path":
        # skips normalisation; callers pass a tuple of (row, col) tuples
        path = object.__new__(cls)
        object.__setattr__(path, "locations", locations)
        return path

    @property
    def finish_time(self) -> int:
        return len(self.locations) - 1

    def __len__(self):
        return len(self.locations)

    def at(self, t: int) -> Location:
        locs = self.locations
        return locs[t] if t < len(locs) else locs[-1]

    @cached_property
    def settled(self) -> int:
        """Length without trailing waits at the last location."""
        locs = self.locations
        n = len(locs)
        while n > 1 and locs[n - 2] == locs[-1]:
            n -= 1
        return n

    @cached_property
    def codes(self) -> np.ndarray:
        """Locations encoded as ``(row << 32) | col`` (see :func:`padded_positions`)."""
        locs = np.asarray(self.locations, dtype=np.int64).reshape(-1, 2)
        return (locs[:, 0] << _SHIFT) | locs[:, 1]


class Collision(NamedTuple):
    kind: str  # "vertex" | "edge"
    agents: tuple
    loc: Location
    loc2: Optional[Location]  # edge collisions: agent i moves loc -> loc2
    time: int

    def sort_key(self):
        return (self.time, self.agents[0], self.agents[1], self.kind != "vertex")


@dataclass(frozen=True)
class Plan:
    assignment: tuple
    paths: tuple
    flowtime: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.flowtime is None:
            object.__setattr__(self, "flowtime", sum(p.finish_time for p in self.paths))

    @property
    def makespan(self) -> int:
        return max((p.finish_time for p in self.paths), default=0)


def padded_positions(paths: Sequence[Path], length: Optional[int] = None):
    """Integer position matrix ``pos[agent, t]`` with code ``(row << 32) | col``.

    Rows shorter than ``length`` repeat their last location.  The default
    length ignores trailing waits, so padding a path never changes the result.
    Coordinates must be non-negative.
    """
    horizon = max(p.settled for p in paths) if length is None else length
    pos = np.empty((len(paths), horizon), dtype=np.int64)
    for a, path in enumerate(paths):
        codes = path.codes[:horizon]
        n = len(codes)
        pos[a, :n] = codes
        pos[a, n:] = codes[n - 1]
    return pos


def _decode(code: int) -> Location:
    return (code >> _SHIFT, code & ((1 << _SHIFT) - 1))


def find_collisions(paths: Sequence[Path]) -> list:
    """Every vertex and edge collision, in canonical order (time, i, j, vertex first)."""
    if len(paths) < 2:
        return []
    out = []
    for t, i, j, kind, u, v in scan_collisions(padded_positions(paths)).tolist():
        if kind == 0:
            out.append(Collision("vertex", (i, j), _decode(u), None, t))
        else:
            out.append(Collision("edge", (i, j), _decode(u), _decode(v), t))
    return out


# --------------------------------------------------------------------------
# validation

START_MISMATCH = "start mismatch"
ILLEGAL_STEP = "illegal step"
GOAL_SEQUENCE = "goal sequence violated"
FINISH_TIME = "finish time not minimal"
NOT_BIJECTION = "assignment not a bijection"
VERTEX_COLLISION = "vertex collision"
EDGE_COLLISION = "edge collision"
FLOWTIME_MISMATCH = "flowtime mismatch"
MALFORMED = "malformed plan"


class Defect(NamedTuple):
    category: str
    message: str


@dataclass
class ValidationReport:
    defects: list = field(default_factory=list)
    flowtime: Optional[int] = None

    @property
    def valid(self) -> bool:
        return not self.defects

    @property
    def categories(self) -> set:
        return {d.category for d in self.defects}

    def add(self, category, message):
        self.defects.append(Defect(category, message))

    def __str__(self):
        if self.valid:
            return f"valid (flowtime {self.flowtime})"
        return "\n".join(f"{d.category}: {d.message}" for d in self.defects)


def sequence_completion(locations, goals) -> Optional[int]:
    """First time the goal sequence is completed along ``locations`` (None if never).

    Being at the first goal at t = 0 counts as visiting it; afterwards each
    timestep can advance the sequence by at most one goal.
    """
    k = 0
    if locations and locations[0] == goals[0]:
        k = 1
        if k == len(goals):
            return 0
    for t in range(1, len(locations)):
        if locations[t] == goals[k]:
            k += 1
            if k == len(goals):
                return t
    return None


def true_finish_time(locations, goals) -> Optional[int]:
    """Minimal finish time of a stored path, or None if the sequence is never completed
    or the path does not end at the final goal."""
    done = sequence_completion(locations, goals)
    if done is None or locations[-1] != goals[-1]:
        return None
    stay = len(locations) - 1
    while stay > 0 and locations[stay - 1] == goals[-1]:
        stay -= 1
    return max(done, stay)


def validate_solution(instance: Instance, plan: Plan) -> ValidationReport:
    """Check a plan against every rule of the problem; never raises."""
    report = ValidationReport()
    m = instance.num_agents
    grid = instance.grid
    if len(plan.paths) != m or len(plan.assignment) != m:
        report.add(MALFORMED, f"expected {m} paths and assignments, got "
                              f"{len(plan.paths)} and {len(plan.assignment)}")
        return report
    if sorted(plan.assignment) != list(range(m)):
        report.add(NOT_BIJECTION, f"assignment {list(plan.assignment)} is not a permutation")

    flowtime = 0
    for a, path in enumerate(plan.paths):
        locs = path.locations
        if not locs:
            report.add(MALFORMED, f"agent {a}: empty path")
            continue
        if locs[0] != instance.starts[a]:
            report.add(START_MISMATCH, f"agent {a}: starts at {locs[0]}, expected {instance.starts[a]}")
        for t, loc in enumerate(locs):
            if not grid.is_free(loc):
                report.add(ILLEGAL_STEP, f"agent {a}: {loc} at t={t} is blocked or off-map")
            elif t > 0:
                prev = locs[t - 1]
                if abs(prev[0] - loc[0]) + abs(prev[1] - loc[1]) > 1:
                    report.add(ILLEGAL_STEP, f"agent {a}: jump {prev}->{loc} at t={t - 1}")
        task_id = plan.assignment[a]
        if not 0 <= task_id < m:
            report.add(NOT_BIJECTION, f"agent {a}: task {task_id} does not exist")
            flowtime += len(locs) - 1
            continue
        goals = instance.tasks[task_id].goals
        if sequence_completion(locs, goals) is None:
            report.add(GOAL_SEQUENCE, f"agent {a}: goals of task {task_id} not visited in order")
            flowtime += len(locs) - 1
            continue
        finish = true_finish_time(locs, goals)
        if finish is None:
            report.add(FINISH_TIME, f"agent {a}: path does not end at final goal {goals[-1]}")
            flowtime += len(locs) - 1
            continue
        if finish != len(locs) - 1:
            report.add(FINISH_TIME, f"agent {a}: stored finish time {len(locs) - 1}, true {finish}")
        flowtime += finish

    _check_collisions(plan.paths, report)
    report.flowtime = flowtime
    if plan.flowtime != flowtime:
        report.add(FLOWTIME_MISMATCH, f"reported {plan.flowtime}, recomputed {flowtime}")
    return report


def _check_collisions(paths, report):
    # plain-python scan, deliberately independent of the kernel used by find_collisions
    paths = [p for p in paths if p.locations]
    if len(paths) < 2:
        return
    horizon = max(len(p) for p in paths)
    for t in range(horizon):
        seen = {}
        for a, p in enumerate(paths):
            loc = p.at(t)
            if loc in seen:
                report.add(VERTEX_COLLISION, f"agents {seen[loc]} and {a} at {loc}, t={t}")
            else:
                seen[loc] = a
        if t + 1 < horizon:
            moves = {}
            for a, p in enumerate(paths):
                u, v = p.at(t), p.at(t + 1)
                if u != v:
                    other = moves.get((v, u))
                    if other is not None:
                        report.add(EDGE_COLLISION, f"agents {other} and {a} swap {v}<->{u} at t={t}")
                    moves[(u, v)] = a
