import pytest

from helpers import B2, crossing_instance, small_instance
from mgtapf.highlevel import (INFEASIBLE, SOLVED, TIMEOUT, CTNode, Solver, SolverConfig,
                              choose_collision, default_horizon, solve, split_constraints)
from mgtapf.heuristics import CARDINAL, NON_CARDINAL, SEMI_CARDINAL
from mgtapf.mla import EdgeConstraint, VertexConstraint
from mgtapf.model import Collision, GridMap, Instance, Task, validate_solution

CONFIGS = [
    SolverConfig(),
    SolverConfig(mode="heuristic", heuristic="cg"),
    SolverConfig(mode="heuristic", heuristic="dg"),
    SolverConfig(mode="heuristic", heuristic="wdg"),
    SolverConfig(mode="focal", omega=1.0),
    SolverConfig(mode="focal", omega=1.1),
    SolverConfig(mode="greedy"),
]


def _run(inst, cfg):
    s = Solver(inst, cfg)
    s.record_nodes = True
    return s, s.solve()


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda c: f"{c.mode}-{c.heuristic}-{c.omega}")
def test_crossing_all_modes(cfg):
    inst = crossing_instance()
    _, res = _run(inst, cfg)
    assert res.status == SOLVED
    assert res.plan.flowtime == 9
    assert validate_solution(inst, res.plan).valid


def test_crossing_optimal_trace():
    s, res = _run(crossing_instance(), SolverConfig())
    first = s.expanded_nodes[0]
    assert first.root and first.assignment == (0, 1) and first.cost == 8
    assert [(c.kind, c.loc, c.time) for c in first.collisions] == [("vertex", B2, 1), ("vertex", B2, 3)]
    second = s.expanded_nodes[1]
    assert second.root and second.assignment == (1, 0) and second.cost == 8
    assert res.stats.roots == 2
    # the first root is split on (B2, 1): one child constrains each agent
    assert split_constraints(first.collisions[0]) == (VertexConstraint(0, B2, 1), VertexConstraint(1, B2, 1))
    assert res.stats.lower_bound == 9


def test_greedy_uses_a_single_root():
    _, res = _run(crossing_instance(), SolverConfig(mode="greedy"))
    assert res.stats.roots == 1 and res.plan.flowtime == 9


def test_split_edge_collision():
    c = Collision("edge", (0, 1), (0, 0), (0, 1), 4)
    assert split_constraints(c) == (EdgeConstraint(0, (0, 0), (0, 1), 4),
                                    EdgeConstraint(1, (0, 1), (0, 0), 4))


def test_choose_collision_priority():
    early = Collision("vertex", (0, 1), (0, 0), None, 1)
    mid = Collision("vertex", (0, 1), (1, 1), None, 2)
    late = Collision("vertex", (0, 1), (2, 2), None, 5)
    node = CTNode(True, (0, 1), (), (), 0, [early, mid, late], 0)
    classes = {1: NON_CARDINAL, 2: SEMI_CARDINAL, 5: CARDINAL}
    assert choose_collision(node, "optimal") is early
    assert choose_collision(node, "heuristic", lambda n, c: classes[c.time]) is late
    node.classes = None
    classes[5] = SEMI_CARDINAL
    assert choose_collision(node, "heuristic", lambda n, c: classes[c.time]) is mid


@pytest.mark.parametrize("kwargs", [
    dict(mode="fast"),
    dict(heuristic="xx"),
    dict(omega=0.9, mode="focal"),
    dict(mode="heuristic"),
    dict(heuristic="cg"),
    dict(omega=1.5),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_for_algorithm():
    assert SolverConfig.for_algorithm("ecbs-ta", omega=1.3).mode == "focal"
    assert SolverConfig.for_algorithm("cbsh-ta", "wdg").heuristic == "wdg"
    assert SolverConfig.for_algorithm("ta-cbs").mode == "greedy"
    with pytest.raises(ValueError):
        SolverConfig.for_algorithm("cbs")


@pytest.mark.parametrize("cfg", CONFIGS[:6], ids=lambda c: f"{c.mode}-{c.heuristic}-{c.omega}")
def test_determinism(cfg):
    for seed in (1, 5, 11):
        inst = small_instance(seed)
        a, b = solve(inst, cfg), solve(inst, cfg)
        assert a.status == b.status
        assert a.stats.as_dict(runtime=False) == b.stats.as_dict(runtime=False)
        if a.plan is not None:
            assert a.plan.assignment == b.plan.assignment
            assert [p.locations for p in a.plan.paths] == [p.locations for p in b.plan.paths]


def test_single_agent_at_goal():
    inst = Instance(GridMap.open(2, 2), [(0, 0)], [Task([(0, 0)])])
    for cfg in CONFIGS:
        res = solve(inst, cfg)
        assert res.status == SOLVED and res.plan.flowtime == 0


def test_shared_final_goal_is_infeasible():
    inst = Instance(GridMap.open(2, 2), [(0, 0), (1, 1)], [Task([(0, 1)]), Task([(1, 0), (0, 1)])])
    res = solve(inst)
    assert res.status == INFEASIBLE and res.stats.infeasible_kind == "final-goal"


def test_forced_swap_is_infeasible_within_horizon():
    # either assignment makes the two agents trade places on a 1x2 corridor
    a, b = (0, 0), (0, 1)
    inst = Instance(GridMap.open(1, 2), [a, b], [Task([b, a]), Task([a, b])])
    assert default_horizon(inst) == 2 * (4 + 2)
    res = solve(inst, SolverConfig(time_limit=30))
    assert res.status == INFEASIBLE and res.stats.infeasible_kind == "horizon"


def test_unreachable_goal_assignment_infeasible():
    g = GridMap.open(1, 3)
    inst = Instance(g, [(0, 0)], [Task([(0, 2)])])
    res = solve(inst, SolverConfig(horizon=1))
    assert res.status == INFEASIBLE


def test_timeout_status():
    inst = small_instance(86)
    res = solve(inst, SolverConfig(time_limit=0.05))
    assert res.status == TIMEOUT and res.plan is None


@pytest.mark.parametrize("omega", [1.05, 1.3, 2.0])
def test_focal_certificate(omega):
    for seed in (2, 9, 17, 40):
        inst = small_instance(seed)
        opt = solve(inst)
        if not opt.solved:
            continue
        s, res = _run(inst, SolverConfig(mode="focal", omega=omega))
        assert res.solved
        lb = res.stats.lower_bound
        assert lb <= opt.plan.flowtime <= res.plan.flowtime <= omega * lb + 1e-9
        assert s.lb_history == sorted(s.lb_history)
