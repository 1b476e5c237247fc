"""Exhaustive joint-state solver for desk-sized instances.

Searches the joint space of (location, label, finished) per agent across all
assignments at once.  A step costs the number of agents not yet finished, so
the accumulated cost of a goal state is the flowtime.  Finished agents never
move again and block their final goal.  Independent of the CBS machinery on
purpose: it keeps its own BFS and never calls MLA*.
"""
from __future__ import annotations

import heapq
import itertools
from collections import deque
from typing import Optional

from .model import Instance, Path, Plan, true_finish_time


class OracleLimitError(ValueError):
    """Instance exceeds the oracle's size limits."""


def _bfs(grid, source):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in grid.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def oracle_solve(instance: Instance, max_agents: int = 3, max_cells: int = 25,
                 horizon: Optional[int] = None) -> Optional[Plan]:
    """Minimum-flowtime plan, or None if the instance has no solution.

    With ``horizon`` set, only plans whose agents all finish by that time
    are considered.
    """
    grid = instance.grid
    m = instance.num_agents
    if m > max_agents:
        raise OracleLimitError(f"{m} agents exceeds oracle limit {max_agents}")
    if grid.size > max_cells:
        raise OracleLimitError(f"{grid.size} cells exceeds oracle limit {max_cells}")
    finals = [t.goals[-1] for t in instance.tasks]
    if len(set(finals)) < m:
        return None  # two agents would park on one cell forever

    dist = {}
    for task in instance.tasks:
        for g in task.goals:
            if g not in dist:
                dist[g] = _bfs(grid, g)

    def remaining(goals, loc, label):
        # distance still to walk from loc with goals[label-1:] unvisited
        if label > len(goals):
            return dist[goals[-1]].get(loc)
        d = dist[goals[label - 1]].get(loc)
        if d is None:
            return None
        for a, b in zip(goals[label - 1:], goals[label:]):
            leg = dist[b].get(a)
            if leg is None:
                return None
            d += leg
        return d

    adj = grid.adjacency
    heap = []
    parents = {}
    tie = itertools.count()
    timed = horizon is not None

    def agent_options(goals, loc, label, moves):
        final, done_label = goals[-1], len(goals) + 1
        out = []
        for v in moves:
            l1 = label + 1 if label < done_label and v == goals[label - 1] else label
            h = remaining(goals, v, l1)
            if h is None:
                continue
            out.append(((v, l1, False), h))
            if l1 == done_label and v == final:
                out.append(((v, l1, True), 0))
        return out

    for perm in itertools.permutations(range(m)):
        goals_of = [instance.tasks[j].goals for j in perm]
        per_agent = []
        for a, s in enumerate(instance.starts):
            goals = goals_of[a]
            label = 2 if s == goals[0] else 1
            h = remaining(goals, s, label)
            if h is None:
                break
            opts = [((s, label, False), h)]
            if label == len(goals) + 1:
                opts.append(((s, label, True), 0))
            per_agent.append(opts)
        else:
            for combo in itertools.product(*per_agent):
                agents = tuple(c[0] for c in combo)
                state = (perm, agents, 0) if timed else (perm, agents)
                if state in parents:
                    continue
                parents[state] = None
                heapq.heappush(heap, (sum(c[1] for c in combo), 0, next(tie), state))

    closed = set()
    while heap:
        f, g, _, state = heapq.heappop(heap)
        if state in closed:
            continue
        closed.add(state)
        perm, agents = state[0], state[1]
        if all(done for _, _, done in agents):
            return _extract(instance, parents, state, g)
        t = state[2] if timed else None
        if timed and t >= horizon:
            continue
        step = sum(1 for _, _, done in agents if not done)
        options = []
        for a, (loc, label, done) in enumerate(agents):
            if done:
                options.append([((loc, label, True), 0)])
            else:
                options.append(agent_options(instance.tasks[perm[a]].goals, loc, label,
                                             adj[loc] + (loc,)))
        olds = [a[0] for a in agents]
        for combo in itertools.product(*options):
            news = [c[0][0] for c in combo]
            if len(set(news)) < m:
                continue
            if any(news[a] == olds[b] and news[b] == olds[a] and news[a] != olds[a]
                   for a in range(m) for b in range(a + 1, m)):
                continue
            nagents = tuple(c[0] for c in combo)
            nstate = (perm, nagents, t + 1) if timed else (perm, nagents)
            if nstate in closed:
                continue
            g1 = g + step
            old = parents.get(nstate)
            if nstate in parents and old is not None and old[1] <= g1:
                continue
            if nstate in parents and old is None:
                continue  # an initial state
            parents[nstate] = (state, g1)
            heapq.heappush(heap, (g1 + sum(c[1] for c in combo), g1, next(tie), nstate))
    return None


def _extract(instance, parents, state, cost) -> Plan:
    chain = []
    while state is not None:
        chain.append(state)
        entry = parents[state]
        state = entry[0] if entry is not None else None
    chain.reverse()
    perm = chain[0][0]
    paths = []
    for a in range(instance.num_agents):
        locs = [s[1][a][0] for s in chain]
        goals = instance.tasks[perm[a]].goals
        finish = true_finish_time(locs, goals)
        paths.append(Path(locs[: finish + 1]))
    plan = Plan(perm, paths)
    assert plan.flowtime == cost, (plan.flowtime, cost)
    return plan
