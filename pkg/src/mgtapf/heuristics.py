"""Labeled MDDs, collision classification and the CG / DG / WDG high-level heuristics."""
from __future__ import annotations

import heapq
import itertools
import time as _time
from dataclasses import dataclass, field
from typing import Optional

from .mla import (ConstraintSet, DistanceTable, EdgeConstraint, SearchStats, VertexConstraint,
                  _Heuristic, initial_label, mla_star)
from .model import Collision, GridMap, Task, find_collisions

CARDINAL = "cardinal"
SEMI_CARDINAL = "semi-cardinal"
NON_CARDINAL = "non-cardinal"
_RANK = {CARDINAL: 0, SEMI_CARDINAL: 1, NON_CARDINAL: 2}


@dataclass
class LabeledMDD:
    """All cost-``cost`` paths of one agent as a layered DAG of (location, label) nodes.

    ``levels[t]`` maps each node at time t to its successors at time t + 1;
    the last level maps the sink to an empty set.
    """

    cost: int
    levels: list
    agent: Optional[int] = None

    @property
    def empty(self) -> bool:
        return not self.levels or not self.levels[0]

    def nodes(self, t):
        return self.levels[min(t, self.cost)].keys()

    def locations(self, t) -> set:
        """Distinct locations at level t; beyond ``cost`` the agent stays at its sink."""
        return {loc for loc, _ in self.nodes(t)}

    def moves(self, t) -> set:
        """Distinct location pairs (at t, at t + 1)."""
        if t >= self.cost:
            return {(loc, loc) for loc in self.locations(self.cost)}
        return {(a[0], b[0]) for a, succ in self.levels[t].items() for b in succ}

    def successors(self, t, node):
        if t >= self.cost:
            return (node,)
        return self.levels[t][node]

    def paths(self):
        """Every root-to-sink location sequence (exponential; for tests)."""
        if self.empty:
            return []
        out = []

        def walk(t, node, acc):
            acc.append(node[0])
            if t == self.cost:
                out.append(tuple(acc))
            else:
                for nxt in sorted(self.levels[t][node]):
                    walk(t + 1, nxt, acc)
            acc.pop()

        for root in sorted(self.levels[0]):
            walk(0, root, [])
        return out


def build_mdd(grid: GridMap, start, task: Task, constraints: ConstraintSet, cost: int,
              table: DistanceTable, agent: Optional[int] = None) -> LabeledMDD:
    """MDD of all constraint-obeying, goal-sequence-completing paths with finish time ``cost``.

    Empty if ``cost`` is below the agent's optimum.
    """
    goals = task.goals
    final = goals[-1]
    done = len(goals) + 1
    h = _Heuristic(task, table)
    adj = grid.adjacency
    vcons, econs = constraints.vertex, constraints.edge

    root = (start, initial_label(start, goals))
    empty = LabeledMDD(cost, [], agent)
    if h(*root) > cost or (start, 0) in vcons:
        return empty
    if cost < constraints.latest_constraint_time(final):
        return empty
    # forward pass, pruned by g + h <= cost
    layers = [{root: set()}]
    for t in range(cost):
        nxt = {}
        for (loc, label), succ in layers[t].items():
            want = goals[label - 1] if label < done else None
            for v in adj[loc] + (loc,):
                if (v, t + 1) in vcons or (v != loc and (loc, v, t) in econs):
                    continue
                l1 = label + 1 if v == want else label
                if t + 1 + h(v, l1) > cost:
                    continue
                node = (v, l1)
                succ.add(node)
                nxt.setdefault(node, set())
        if not nxt:
            return empty
        layers.append(nxt)
    sink = (final, done)
    if sink not in layers[cost]:
        return empty
    # backward pass keeps nodes that reach the sink
    alive = {sink}
    layers[cost] = {sink: set()}
    for t in range(cost - 1, -1, -1):
        level = {}
        for node, succ in layers[t].items():
            keep = succ & alive
            if keep:
                level[node] = keep
        layers[t] = level
        alive = set(level)
    return LabeledMDD(cost, layers, agent)


def classify_collision(collision: Collision, mdd_i: LabeledMDD, mdd_j: LabeledMDD) -> str:
    """Cardinal if the contested vertex/edge is the only one at its level in both MDDs."""
    t = collision.time
    if collision.kind == "vertex":
        single_i = len(mdd_i.locations(t)) == 1
        single_j = len(mdd_j.locations(t)) == 1
    else:
        u, v = collision.loc, collision.loc2
        single_i = mdd_i.moves(t) == {(u, v)}
        single_j = mdd_j.moves(t) == {(v, u)}
    if single_i and single_j:
        return CARDINAL
    if single_i or single_j:
        return SEMI_CARDINAL
    return NON_CARDINAL


def joint_mdd_empty(mdd_i: LabeledMDD, mdd_j: LabeledMDD) -> bool:
    """True iff every pair of paths from the two MDDs collides (agents are dependent)."""
    if mdd_i.empty or mdd_j.empty:
        return True
    horizon = max(mdd_i.cost, mdd_j.cost)
    level = {(a, b) for a in mdd_i.nodes(0) for b in mdd_j.nodes(0) if a[0] != b[0]}
    for t in range(horizon):
        nxt = set()
        for a, b in level:
            for a1 in mdd_i.successors(t, a):
                for b1 in mdd_j.successors(t, b):
                    if a1[0] == b1[0]:
                        continue
                    if a1[0] == b[0] and b1[0] == a[0]:
                        continue
                    nxt.add((a1, b1))
        if not nxt:
            return True
        level = nxt
    return not level


# --------------------------------------------------------------------------
# (edge-weighted) minimum vertex cover

def min_vertex_cover(edges, weighted: bool = False) -> int:
    """Optimal (edge-weighted) vertex cover value.

    ``edges`` maps vertex pairs to weights (or is an iterable of pairs).  With
    weights, vertices receive non-negative integers x_v such that
    x_u + x_v >= w(u, v) for every edge; the result is min sum x_v.
    """
    if isinstance(edges, dict):
        items = edges.items()
    else:
        items = ((e, 1) for e in edges)
    adj = {}
    for (u, v), w in items:
        w = int(w) if weighted else 1
        if w <= 0 or u == v:
            continue
        adj.setdefault(u, {})
        adj.setdefault(v, {})
        adj[u][v] = max(adj[u].get(v, 0), w)
        adj[v][u] = adj[u][v]
    total = 0
    seen = set()
    for s in sorted(adj):
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        total += _cover_component(comp, adj)
    return total


def _cover_component(vertices, adj) -> int:
    order = sorted(vertices, key=lambda x: (-len(adj[x]), x))
    top = {x: max(adj[x].values()) for x in order}
    best = [sum(w for x in order for y, w in adj[x].items() if x < y)]
    value = {}

    def lower_bound(idx):
        rest = order[idx:]
        need = {}
        for x in rest:
            need[x] = max((w - value[y] for y, w in adj[x].items() if y in value), default=0)
            need[x] = max(need[x], 0)
        lb = sum(need.values())
        used = set()
        for x in rest:
            if x in used:
                continue
            for y, w in adj[x].items():
                if y not in value and y not in used and y != x:
                    extra = w - need[x] - need[y]
                    if extra > 0:
                        lb += extra
                        used.add(x)
                        used.add(y)
                        break
        return lb

    def search(idx, cost):
        if cost + lower_bound(idx) >= best[0]:
            return
        if idx == len(order):
            best[0] = cost
            return
        x = order[idx]
        need = max((w - value[y] for y, w in adj[x].items() if y in value), default=0)
        need = max(need, 0)
        hi = need if all(y in value for y in adj[x]) else max(need, top[x])
        for val in range(need, hi + 1):
            value[x] = val
            search(idx + 1, cost + val)
            del value[x]

    search(0, 0)
    return best[0]


# --------------------------------------------------------------------------
# heuristic context shared by one solver run

@dataclass
class HeuristicContext:
    grid: GridMap
    starts: tuple
    tasks: tuple
    table: DistanceTable
    horizon: int
    stats: SearchStats
    deadline: Optional[float] = None
    wdg_budget: float = 1.0  # seconds per CT node for pairwise sub-solves
    wdg_node_limit: int = 500
    mdds: dict = field(default_factory=dict)
    pair_costs: dict = field(default_factory=dict)
    subsolve_timeouts: int = 0

    def constraint_key(self, constraints, agent):
        return tuple(sorted((c for c in constraints if c.agent == agent), key=lambda c: (len(c), c)))

    def mdd(self, node, agent) -> LabeledMDD:
        task_id = node.assignment[agent]
        ckey = self.constraint_key(node.constraints, agent)
        cost = node.paths[agent].finish_time
        key = (agent, task_id, ckey, cost)
        mdd = self.mdds.get(key)
        if mdd is None:
            mdd = build_mdd(self.grid, self.starts[agent], self.tasks[task_id],
                            ConstraintSet(ckey), cost, self.table, agent)
            assert not mdd.empty, "MDD must be built at the agent's optimal cost"
            self.mdds[key] = mdd
        return mdd

    def classify(self, node, collision) -> str:
        i, j = collision.agents
        return classify_collision(collision, self.mdd(node, i), self.mdd(node, j))

    def pair_extra_cost(self, node, i, j, deadline) -> int:
        """Optimal two-agent flowtime under the node's constraints minus the individual optima."""
        key = (i, j, node.assignment[i], node.assignment[j],
               self.constraint_key(node.constraints, i), self.constraint_key(node.constraints, j))
        if key in self.pair_costs:
            return self.pair_costs[key]
        base = node.paths[i].finish_time + node.paths[j].finish_time
        best = _pair_cbs(self, node, i, j, deadline)
        if best is None:
            # dependent pairs cost at least one extra step
            self.subsolve_timeouts += 1
            extra = 1
        else:
            extra = best - base
        self.pair_costs[key] = extra
        return extra


def _pair_cbs(ctx: HeuristicContext, node, i, j, deadline) -> Optional[int]:
    """Plain CBS on agents i and j with fixed tasks; None when out of budget or exhausted."""
    agents = (i, j)
    base = tuple(c for c in node.constraints if c.agent in agents)
    counter = itertools.count()
    paths0 = (node.paths[i], node.paths[j])
    open_ = []

    def push(cons, paths):
        cost = paths[0].finish_time + paths[1].finish_time
        coll = find_collisions(paths)
        heapq.heappush(open_, (cost, len(coll), next(counter), cons, paths, coll))

    push(base, paths0)
    expanded = 0
    while open_:
        cost, _, _, cons, paths, coll = heapq.heappop(open_)
        if not coll:
            return cost
        expanded += 1
        if expanded > ctx.wdg_node_limit or _time.perf_counter() > deadline:
            return None
        c = coll[0]
        for side in (0, 1):
            agent = agents[side]
            if c.kind == "vertex":
                new = VertexConstraint(agent, c.loc, c.time)
            elif side == 0:
                new = EdgeConstraint(agent, c.loc, c.loc2, c.time)
            else:
                new = EdgeConstraint(agent, c.loc2, c.loc, c.time)
            cons1 = cons + (new,)
            task = ctx.tasks[node.assignment[agent]]
            path = mla_star(ctx.grid, ctx.starts[agent], task, ConstraintSet(cons1, agent),
                            ctx.table, ctx.horizon, ctx.stats)
            if path is None:
                continue
            new_paths = (path, paths[1]) if side == 0 else (paths[0], path)
            push(cons1, new_paths)
    return None


def _classified(ctx, node):
    classes = getattr(node, "classes", None)
    if classes is None:
        classes = [ctx.classify(node, c) for c in node.collisions]
        node.classes = classes
    return classes


def h_cg(node, ctx: HeuristicContext) -> int:
    """Minimum vertex cover of the cardinal-conflict graph."""
    edges = {c.agents for c, k in zip(node.collisions, _classified(ctx, node)) if k == CARDINAL}
    return min_vertex_cover(edges)


def dependency_graph(node, ctx: HeuristicContext) -> set:
    classes = _classified(ctx, node)
    cardinal = {c.agents for c, k in zip(node.collisions, classes) if k == CARDINAL}
    edges = set()
    for pair in sorted({c.agents for c in node.collisions}):
        i, j = pair
        if pair in cardinal or joint_mdd_empty(ctx.mdd(node, i), ctx.mdd(node, j)):
            edges.add(pair)
    return edges


def h_dg(node, ctx: HeuristicContext) -> int:
    """Minimum vertex cover of the pairwise dependency graph."""
    return min_vertex_cover(dependency_graph(node, ctx))


def h_wdg(node, ctx: HeuristicContext) -> int:
    """Edge-weighted minimum vertex cover; weights are pairwise extra costs."""
    deadline = _time.perf_counter() + ctx.wdg_budget
    if ctx.deadline is not None:
        deadline = min(deadline, ctx.deadline)
    weights = {}
    for i, j in sorted(dependency_graph(node, ctx)):
        weights[(i, j)] = ctx.pair_extra_cost(node, i, j, deadline)
    return min_vertex_cover(weights, weighted=True)


HEURISTICS = {"cg": h_cg, "dg": h_dg, "wdg": h_wdg}
