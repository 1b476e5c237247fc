import random

import pytest

from helpers import brute_force_finish_time, random_constraints, small_instance
from mgtapf.mla import (ConstraintSet, EdgeConstraint, SearchState, SearchStats, SearchTimeout,
                        VertexConstraint, h_value, initial_label, mla_star, mla_star_focal,
                        precompute_goal_distances)
from mgtapf.model import GridMap, Path, Task
from mgtapf.instances import random_grid


def _table(grid, *tasks):
    return precompute_goal_distances(grid, list(tasks))


def test_h_values():
    g = GridMap.open(3, 3)
    task = Task([(1, 2), (1, 0)])
    table = _table(g, task)
    assert h_value(SearchState((1, 0), 0, 1), task, table) == 4
    assert h_value(SearchState((1, 2), 0, 2), task, table) == 2
    assert h_value(SearchState((1, 0), 0, 3), task, table) == 0
    assert table.suffix(task.goals) == [2, 0]


def test_initial_label():
    assert initial_label((0, 0), ((0, 0), (1, 1))) == 2
    assert initial_label((0, 0), ((1, 1), (0, 0))) == 1


def test_already_at_single_goal():
    g = GridMap.open(2, 2)
    task = Task([(0, 0)])
    path = mla_star(g, (0, 0), task, ConstraintSet(), _table(g, task), 10)
    assert path.locations == ((0, 0),)


def test_two_goal_path_on_corridor():
    g = GridMap.open(1, 4)
    task = Task([(0, 3), (0, 0)])
    path = mla_star(g, (0, 1), task, ConstraintSet(), _table(g, task), 20)
    assert path.finish_time == 5
    assert path.locations[2] == (0, 3) and path.locations[-1] == (0, 0)


def test_parking_respects_late_constraint():
    g = GridMap.open(1, 3)
    task = Task([(0, 2)])
    cs = ConstraintSet([VertexConstraint(0, (0, 2), 5)])
    path = mla_star(g, (0, 0), task, cs, _table(g, task), 20)
    # reaching the goal at t=2 is not enough: the agent must be away at t=5
    assert path.finish_time == 6
    assert path.at(5) != (0, 2)


def test_edge_constraint_forces_wait():
    g = GridMap.open(1, 2)
    task = Task([(0, 1)])
    cs = ConstraintSet([EdgeConstraint(0, (0, 0), (0, 1), 0)])
    path = mla_star(g, (0, 0), task, cs, _table(g, task), 10)
    assert path.locations == ((0, 0), (0, 0), (0, 1))


def test_horizon_and_start_constraint():
    g = GridMap.open(1, 4)
    task = Task([(0, 3)])
    t = _table(g, task)
    assert mla_star(g, (0, 0), task, ConstraintSet(), t, 2) is None
    assert mla_star(g, (0, 0), task, ConstraintSet(), t, 3).finish_time == 3
    assert mla_star(g, (0, 0), task, ConstraintSet([VertexConstraint(0, (0, 0), 0)]), t, 9) is None


def test_constraints_for_other_agents_are_ignored():
    cs = ConstraintSet([VertexConstraint(1, (0, 0), 3), VertexConstraint(0, (0, 1), 2)], agent=0)
    assert cs.vertex == {((0, 1), 2)}


def _random_case(seed):
    rng = random.Random(seed)
    h, w = rng.choice([(3, 3), (3, 4), (4, 4), (4, 5), (5, 5)])
    grid = random_grid(seed, h, w, rng.choice([0.0, 0.1, 0.2]))
    free = list(grid.free_cells)
    k = rng.randint(1, 3)
    goals = [rng.choice(free)]
    while len(goals) < k:
        g = rng.choice(free)
        if g != goals[-1]:
            goals.append(g)
    start = rng.choice(free)
    cons = random_constraints(rng, grid, 0, rng.randint(0, 6), 8)
    return grid, start, Task(goals), cons


@pytest.mark.parametrize("seed", range(200))
def test_mla_star_matches_layered_reachability(seed):
    grid, start, task, cons = _random_case(seed)
    horizon = 30
    expected = brute_force_finish_time(grid, start, task.goals, cons, horizon)
    path = mla_star(grid, start, task, ConstraintSet(cons), _table(grid, task), horizon)
    if expected is None:
        assert path is None
        return
    assert path is not None and path.finish_time == expected
    locs = path.locations
    assert locs[0] == start and locs[-1] == task.final
    vcons = {(c.loc, c.time) for c in cons if isinstance(c, VertexConstraint)}
    econs = {(c.u, c.v, c.time) for c in cons if isinstance(c, EdgeConstraint)}
    for t, loc in enumerate(locs):
        assert (loc, t) not in vcons
        if t:
            assert (locs[t - 1], loc, t - 1) not in econs
            assert abs(locs[t - 1][0] - loc[0]) + abs(locs[t - 1][1] - loc[1]) <= 1


@pytest.mark.parametrize("omega", [1.0, 1.1, 1.5, 2.0])
@pytest.mark.parametrize("seed", range(50))
def test_focal_bound(seed, omega):
    grid, start, task, cons = _random_case(seed)
    table = _table(grid, task)
    optimum = brute_force_finish_time(grid, start, task.goals, cons, 30)
    got = mla_star_focal(grid, start, task, ConstraintSet(cons), table, 30, omega)
    if optimum is None:
        assert got is None
        return
    path, lb = got
    assert lb <= optimum <= path.finish_time <= omega * lb + 1e-9
    if omega == 1.0:
        assert path.finish_time == optimum


def test_focal_avoids_other_paths_when_free():
    g = GridMap.open(3, 3)
    task = Task([(2, 2)])
    other = [Path([(1, 2), (1, 1), (1, 0)])]
    path, _ = mla_star_focal(g, (0, 0), task, ConstraintSet(), _table(g, task), 9, 1.0, other)
    assert path.finish_time == 4
    for t, loc in enumerate(path.locations):
        assert loc != other[0].at(t)


def test_focal_rejects_small_omega():
    g = GridMap.open(1, 2)
    task = Task([(0, 1)])
    with pytest.raises(ValueError):
        mla_star_focal(g, (0, 0), task, ConstraintSet(), _table(g, task), 5, 0.9)


def test_timeout_is_raised_after_deadline():
    g = GridMap.open(5, 5)
    task = Task([(4, 4)])
    stats = SearchStats(deadline=0.0)
    stats.expanded = 9_999
    with pytest.raises(SearchTimeout):
        mla_star(g, (0, 0), task, ConstraintSet(), _table(g, task), 50, stats)


def test_distance_table_on_generated_instance():
    inst = small_instance(0)
    table = precompute_goal_distances(inst.grid, inst.tasks)
    for task in inst.tasks:
        for g in task.goals:
            assert table.distance(g, g) == 0
