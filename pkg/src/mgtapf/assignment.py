"""Agent-to-task assignment: cost matrix, Hungarian optimum, ranked enumeration."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernels import hungarian
from .mla import DistanceTable, initial_label
from .model import Instance


class InfeasibleAssignment(Exception):
    """No bijection with finite cost exists."""


@dataclass(frozen=True, order=True)
class Assignment:
    cost: float
    tasks: tuple  # tasks[agent] = task index

    def __iter__(self):
        return iter(self.tasks)

    def __len__(self):
        return len(self.tasks)

    def __getitem__(self, agent):
        return self.tasks[agent]


def task_distance(table: DistanceTable, start, goals) -> float:
    """Collision-free length of visiting ``goals`` in order from ``start``."""
    if initial_label(start, goals) == 2:
        return table.suffix(goals)[0]
    return table.distance(start, goals[0]) + table.suffix(goals)[0]


def build_cost_matrix(instance: Instance, table: DistanceTable) -> np.ndarray:
    m = instance.num_agents
    C = np.empty((m, m))
    for i, s in enumerate(instance.starts):
        for j, task in enumerate(instance.tasks):
            C[i, j] = task_distance(table, s, task.goals)
    return C


def _big(C: np.ndarray) -> float:
    finite = C[np.isfinite(C)]
    top = float(finite.max()) if finite.size else 0.0
    return (max(top, 0.0) + 1.0) * (C.shape[0] + 1)


def _lexicographic_optimum(C, row_to_col, u, v):
    """Lexicographically smallest optimal permutation.

    Every optimal permutation is a perfect matching on the zero-reduced-cost
    edges of the optimal duals; fix rows in order, each to its smallest task
    reachable by an alternating cycle.
    """
    n = C.shape[0]
    scale = 1e-9 * (1.0 + float(np.abs(C).max()))
    tight = np.abs(C - u[:, None] - v[None, :]) <= scale
    match = row_to_col.copy()
    owner = np.empty(n, dtype=np.int64)
    owner[match] = np.arange(n)
    fixed_row = np.zeros(n, dtype=bool)
    for i in range(n):
        # rows that can hand their task around to reach row i's current task
        target = match[i]
        nxt = np.full(n, -1, dtype=np.int64)
        reach = np.zeros(n, dtype=bool)
        reach[i] = True
        frontier = np.array([i])
        while frontier.size:
            cand = tight[:, match[frontier]] & ~fixed_row[:, None] & ~reach[:, None]
            hit = cand.any(axis=1)
            if not hit.any():
                break
            rows = np.nonzero(hit)[0]
            nxt[rows] = frontier[np.argmax(cand[rows], axis=1)]
            reach[rows] = True
            frontier = rows
        choices = np.nonzero(tight[i] & reach[owner] & ~fixed_row[owner])[0]
        j = int(choices.min()) if choices.size else int(target)
        if j != target:
            # rotate: i takes j, each row along the chain takes the next row's task
            a = owner[j]
            chain = [a]
            while nxt[a] != i:
                a = nxt[a]
                chain.append(a)
            new = {i: j}
            for a, b in zip(chain, chain[1:] + [i]):
                new[a] = match[b]
            for a, t in new.items():
                match[a] = t
                owner[t] = a
        fixed_row[i] = True
    return match


def _solve(C: np.ndarray, big: float) -> Optional[Assignment]:
    finite = np.where(np.isfinite(C), C, big)
    row_to_col, u, v = hungarian(finite)
    total = float(finite[np.arange(C.shape[0]), row_to_col].sum())
    if total >= big:
        return None
    row_to_col = _lexicographic_optimum(finite, row_to_col, u, v)
    cost = float(C[np.arange(C.shape[0]), row_to_col].sum())
    cost = int(cost) if cost.is_integer() else cost
    return Assignment(cost, tuple(int(x) for x in row_to_col))


def best_assignment(C) -> Assignment:
    """Minimum-cost bijection; ties go to the lexicographically smallest permutation."""
    C = np.asarray(C, dtype=np.float64)
    if C.shape[0] == 0:
        return Assignment(0, ())
    result = _solve(C, _big(C))
    if result is None:
        raise InfeasibleAssignment("no finite-cost assignment exists")
    return result


class AssignmentEnumerator:
    """Murty-style ranking: bijections in non-decreasing cost, each exactly once.

    ``best`` is available right after construction; :func:`next_assignment`
    yields the second, third, ... best.
    """

    def __init__(self, C):
        self.C = np.asarray(C, dtype=np.float64)
        self._big = _big(self.C) if self.C.size else 1.0
        self._heap = []
        self._tie = 0
        self.emitted = 0
        self.best = None
        first = _solve(self.C, self._big) if self.C.shape[0] else Assignment(0, ())
        if first is not None:
            self._heap.append((first.cost, first.tasks, 0, (), ()))
        self.best = self._pop()

    def _pop(self) -> Optional[Assignment]:
        if not self._heap:
            return None
        cost, tasks, _, forced, forbidden = heapq.heappop(self._heap)
        self._partition(tasks, forced, forbidden)
        self.emitted += 1
        return Assignment(cost, tasks)

    def _partition(self, tasks, forced, forbidden):
        forced_rows = {r for r, _ in forced}
        free_rows = [r for r in range(len(tasks)) if r not in forced_rows]
        extra = list(forced)
        for r in free_rows:
            C = self.C.copy()
            for fr, fc in extra:
                keep = C[fr, fc]
                C[fr, :] = math.inf
                C[:, fc] = math.inf
                C[fr, fc] = keep
            new_forbidden = forbidden + ((r, tasks[r]),)
            for br, bc in new_forbidden:
                C[br, bc] = math.inf
            sub = _solve(C, self._big)
            if sub is not None:
                self._tie += 1
                heapq.heappush(self._heap, (sub.cost, sub.tasks, self._tie, tuple(extra), new_forbidden))
            extra.append((r, tasks[r]))

    def next(self) -> Optional[Assignment]:
        return self._pop()

    def __iter__(self):
        """Best first (if nothing else was drawn yet), then the remaining ranking."""
        if self.best is not None and self.emitted == 1:
            yield self.best
        while True:
            a = self._pop()
            if a is None:
                return
            yield a


def next_assignment(enumerator: AssignmentEnumerator) -> Optional[Assignment]:
    """Next-best bijection, or None once exhausted."""
    return enumerator.next()
