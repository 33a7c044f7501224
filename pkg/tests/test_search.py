"""Permutation heuristics: initial order, SP search, GA operators and loop."""

import random

import pytest

from photosched.core import Instance, Job, Objective
from photosched.decoder import JobOrder, decode
from photosched.evaluator import check_feasibility
from photosched.instgen import GenConfig, ReadyScenario, equipment, generate_instance
from photosched.search import (
    GAConfig,
    SPConfig,
    crossover,
    crossover_children,
    mutate,
    run_ga,
    run_sp,
    sp_initial_order,
)


def test_sp_initial_order_sorts_by_ready_then_urgency():
    jobs = (
        Job("J1", (0, 20, 75, 0, 30, 0), ready=50, due=100, weight=1),
        Job("J2", (0, 20, 75, 0, 30, 0), ready=0, due=300, weight=1),
        Job("J3", (0, 20, 75, 0, 30, 0), ready=0, due=150, weight=1),
        Job("J4", (0, 20, 75, 0, 30, 0), ready=0, due=300, weight=3),
    )
    inst = Instance(jobs=jobs, machines=tuple(equipment(1)))
    order = sp_initial_order(inst)
    # Zero-ready jobs first by due/weight (J4: 100, J3: 150, J2: 300).
    assert list(order) == ["J4", "J3", "J2", "J1"]


def test_sp_initial_order_breaks_ties_by_cluster_affinity():
    jobs = (
        Job("JA", (0, 20, 75, 45, 30, 0), due=200),  # pre-bake: fewer tools
        Job("JB", (0, 20, 75, 0, 30, 0), due=200),
    )
    inst = Instance(jobs=jobs, machines=tuple(equipment(1)))
    assert list(sp_initial_order(inst)) == ["JB", "JA"]


def test_sp_single_iteration_is_initial_decode():
    inst = generate_instance(GenConfig(n=5, equipment=2, seed=4))
    _, base = decode(inst, sp_initial_order(inst), Objective.CMAX)
    sch, value, trace = run_sp(inst, Objective.CMAX,
                               SPConfig(max_iterations=1, seed=0))
    assert value == base
    assert trace == [base]
    assert check_feasibility(inst, sch) == []


def test_sp_trace_monotone_and_feasible():
    inst = generate_instance(
        GenConfig(n=8, ready_scenario=ReadyScenario.MIXED_30_70,
                  equipment=2, seed=21))
    sch, value, trace = run_sp(inst, Objective.TWT,
                               SPConfig(max_iterations=200, seed=5))
    assert len(trace) == 200
    assert all(a >= b for a, b in zip(trace, trace[1:]))
    assert trace[-1] == value
    assert check_feasibility(inst, sch) == []


def test_sp_never_worse_than_initial():
    for seed in range(5):
        inst = generate_instance(GenConfig(n=6, equipment=1, seed=seed))
        _, base = decode(inst, sp_initial_order(inst), Objective.WCT)
        _, value, _ = run_sp(inst, Objective.WCT,
                             SPConfig(max_iterations=100, seed=seed))
        assert value <= base


def test_sp_deterministic():
    inst = generate_instance(GenConfig(n=6, equipment=2, seed=8))
    config = SPConfig(max_iterations=150, seed=42)
    a = run_sp(inst, Objective.CMAX, config)
    b = run_sp(inst, Objective.CMAX, config)
    assert a[1] == b[1] and a[2] == b[2]


def test_sp_config_validation():
    with pytest.raises(ValueError):
        SPConfig(max_iterations=0)


def test_crossover_children_worked_example():
    u = JobOrder((1, 2, 3, 4, 5))
    v = JobOrder((5, 1, 4, 3, 2))
    cu, cv = crossover_children(u, v, 2)
    assert cu.order == (1, 2, 4, 3, 5)
    assert cv.order == (5, 1, 3, 4, 2)


def test_crossover_equal_position_returns_parent():
    u = JobOrder((1, 2, 3))
    v = JobOrder((3, 2, 1))
    cu, cv = crossover_children(u, v, 1)
    assert cu.order == u.order and cv.order == v.order


def test_operators_preserve_permutations():
    rng = random.Random(7)
    ids = tuple(f"J{i}" for i in range(1, 9))
    u = JobOrder(ids)
    v = JobOrder(tuple(reversed(ids)))
    for _ in range(2000):
        child = mutate(crossover(u, v, rng), rng)
        assert sorted(child.order) == sorted(ids)
        u, v = v, child


def test_mutate_changes_two_positions():
    rng = random.Random(3)
    u = JobOrder(("J1", "J2", "J3", "J4"))
    child = mutate(u, rng)
    diffs = [i for i in range(4) if child.order[i] != u.order[i]]
    assert len(diffs) == 2
    assert mutate(JobOrder(("J1",)), rng).order == ("J1",)


def test_ga_stops_on_stall_with_constant_fitness():
    inst = Instance(jobs=(Job("J1", (40, 20, 75, 45, 30, 45)),),
                    machines=tuple(equipment(2)))
    config = GAConfig(pop_size=4, stall_window=50, seed=0)
    _, value, history = run_ga(inst, Objective.CMAX, config)
    assert value == 255
    assert len(history) == config.stall_window + 1
    assert len(set(history)) == 1


def test_ga_feasible_and_seeded_with_initial_order():
    inst = generate_instance(GenConfig(n=6, equipment=2, seed=9))
    _, base = decode(inst, sp_initial_order(inst), Objective.WCT)
    sch, value, history = run_ga(inst, Objective.WCT,
                                 GAConfig(pop_size=10, max_generations=60,
                                          stall_window=20, seed=1))
    assert check_feasibility(inst, sch) == []
    assert value <= base
    assert all(a >= b for a, b in zip(history, history[1:]))


def test_ga_deterministic():
    inst = generate_instance(GenConfig(n=6, equipment=1, seed=14))
    config = GAConfig(pop_size=12, max_generations=40, stall_window=15, seed=77)
    a = run_ga(inst, Objective.TWT, config)
    b = run_ga(inst, Objective.TWT, config)
    assert a[1] == b[1] and a[2] == b[2]


def test_ga_config_validation():
    with pytest.raises(ValueError):
        GAConfig(pop_size=1)
    with pytest.raises(ValueError):
        GAConfig(stall_window=600, max_generations=500)
