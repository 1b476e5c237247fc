"""Shared fixtures and independent reference implementations for the tests.

Nothing here imports the solver internals it checks: the brute-force routines
below are written from the problem definition only.
"""
import itertools
import random
from collections import deque

import numpy as np

from mgtapf.instances import generate_instance, random_grid
from mgtapf.mla import EdgeConstraint, VertexConstraint
from mgtapf.model import GridMap, Instance, Task

# rows A..C -> 0..2, columns 1..3 -> 0..2
A2, B1, B2, B3, C2 = (0, 1), (1, 0), (1, 1), (1, 2), (2, 1)
G_A = (C2, A2)
G_B = (B3, B1)


def crossing_instance() -> Instance:
    """Two agents on an open 3x3 grid; task 0 is g_b, task 1 is g_a."""
    return Instance(GridMap.open(3, 3), [B1, A2], [Task(G_B), Task(G_A)])


def small_instance(seed: int) -> Instance:
    """Criterion-1 style instance: <= 5x5, <= 20% obstacles, m in {2, 3}, K in 1..3."""
    rng = random.Random(seed)
    h, w = rng.choice([(4, 4), (4, 5), (5, 5), (5, 4), (3, 5)])
    density = rng.choice([0.0, 0.1, 0.2])
    grid = random_grid(seed, h, w, density)
    m = rng.choice([2, 3])
    return generate_instance(seed, grid, m, 1, 3)


def small_suite(n: int = 200):
    return [small_instance(s) for s in range(n)]


# --------------------------------------------------------------------------
# grids

def bfs(grid: GridMap, source):
    dist = {source: 0}
    q = deque([source])
    while q:
        r, c = q.popleft()
        for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if grid.is_free(nb) and nb not in dist:
                dist[nb] = dist[(r, c)] + 1
                q.append(nb)
    return dist


def steps(grid: GridMap, loc):
    r, c = loc
    out = [loc]
    for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
        if grid.is_free(nb):
            out.append(nb)
    return out


# --------------------------------------------------------------------------
# single-agent reference: layered reachability over (location, label)

def _label_after(goals, label, loc):
    if label <= len(goals) and goals[label - 1] == loc:
        return label + 1
    return label


def brute_force_finish_time(grid, start, goals, constraints, horizon):
    """Minimum finish time over all constraint-obeying paths, or None."""
    vertex = {(c.loc, c.time) for c in constraints if isinstance(c, VertexConstraint)}
    edge = {(c.u, c.v, c.time) for c in constraints if isinstance(c, EdgeConstraint)}
    final, done = goals[-1], len(goals) + 1
    blocked_final = [t for (loc, t) in vertex if loc == final]
    if (start, 0) in vertex:
        return None
    layer = {(start, _label_after(goals, 1, start))}
    for t in range(horizon + 1):
        if (final, done) in layer and all(bt <= t for bt in blocked_final):
            return t
        nxt = set()
        for loc, label in layer:
            for v in steps(grid, loc):
                if (v, t + 1) in vertex or (v != loc and (loc, v, t) in edge):
                    continue
                nxt.add((v, _label_after(goals, label, v)))
        layer = nxt
    return None


def enumerate_paths(grid, start, goals, constraints, length):
    """Every constraint-obeying location sequence of ``length + 1`` cells that
    visits the goals in order and ends at the final goal, where the agent can
    then stay forever."""
    vertex = {(c.loc, c.time) for c in constraints if isinstance(c, VertexConstraint)}
    edge = {(c.u, c.v, c.time) for c in constraints if isinstance(c, EdgeConstraint)}
    dist = {g: bfs(grid, g) for g in goals}
    out = []

    def still_needed(loc, label):
        # lower bound on the steps left: walk the unvisited goals in order
        if label > len(goals):
            return dist[goals[-1]].get(loc, 10**9)
        need, here = 0, loc
        for g in goals[label - 1:]:
            need += dist[g].get(here, 10**9)
            here = g
        return need

    def rec(path, label):
        t = len(path) - 1
        if still_needed(path[-1], label) > length - t:
            return
        if t == length:
            if label == len(goals) + 1 and path[-1] == goals[-1]:
                out.append(tuple(path))
            return
        loc = path[-1]
        for v in steps(grid, loc):
            if (v, t + 1) in vertex or (v != loc and (loc, v, t) in edge):
                continue
            path.append(v)
            rec(path, _label_after(goals, label, v))
            path.pop()

    parked_ok = all(t <= length for loc, t in vertex if loc == goals[-1])
    if parked_ok and (start, 0) not in vertex:
        rec([start], _label_after(goals, 1, start))
    return out


def random_constraints(rng, grid, agent, n, max_t):
    free = list(grid.free_cells)
    out = []
    for _ in range(n):
        t = rng.randint(0, max_t)
        if rng.random() < 0.6:
            out.append(VertexConstraint(agent, rng.choice(free), t))
        else:
            u = rng.choice(free)
            nbrs = [x for x in steps(grid, u) if x != u]
            if nbrs:
                out.append(EdgeConstraint(agent, u, rng.choice(nbrs), t))
    return out


# --------------------------------------------------------------------------
# assignment reference

def brute_force_ranking(C):
    """All finite-cost permutations sorted by (cost, permutation)."""
    C = np.asarray(C, dtype=float)
    m = C.shape[0]
    rows = []
    for perm in itertools.permutations(range(m)):
        cost = sum(C[i, perm[i]] for i in range(m))
        if np.isfinite(cost):
            rows.append((cost, perm))
    rows.sort()
    return rows


def brute_force_vertex_cover(edges, weighted=False):
    """Exhaustive (edge-weighted) vertex cover over small integer assignments."""
    if isinstance(edges, dict):
        items = [(e, w if weighted else 1) for e, w in edges.items()]
    else:
        items = [(e, 1) for e in edges]
    items = [(e, w) for e, w in items if w > 0 and e[0] != e[1]]
    verts = sorted({v for e, _ in items for v in e})
    if not verts:
        return 0
    top = max(w for _, w in items)
    best = None
    for vals in itertools.product(range(top + 1), repeat=len(verts)):
        x = dict(zip(verts, vals))
        if all(x[u] + x[v] >= w for (u, v), w in items):
            s = sum(vals)
            best = s if best is None else min(best, s)
    return best
