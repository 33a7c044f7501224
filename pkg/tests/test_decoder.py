"""Greedy permutation decoding."""

import random

import pytest

from photosched.core import Instance, Job, Objective
from photosched.decoder import DecodeError, JobOrder, cluster_affinity, decode
from photosched.evaluator import check_feasibility
from photosched.instgen import GenConfig, ReadyScenario, equipment, generate_instance


def test_job_order_rejects_duplicates():
    with pytest.raises(ValueError):
        JobOrder(("J1", "J1"))
    order = JobOrder(("J2", "J1"))
    assert list(order) == ["J2", "J1"]
    assert len(order) == 2


def test_decode_rejects_non_permutations():
    inst = generate_instance(GenConfig(n=3, equipment=2, seed=0))
    with pytest.raises(DecodeError):
        decode(inst, JobOrder(("J1", "J2")), Objective.CMAX)


def test_cluster_affinity_counts_usable_cluster_machines():
    inst = Instance(jobs=(Job("JA", (0, 20, 75, 0, 30, 45)),
                          Job("JB", (0, 20, 75, 45, 30, 45))),
                    machines=tuple(equipment(1)))
    # JA may use any cluster family: 2 CE + 2 CED + 2 CEDB + 1 ED.
    assert cluster_affinity(inst, inst.job("JA")) == 7
    # JB needs the pre-develop bake, leaving only CE and ED tools.
    assert cluster_affinity(inst, inst.job("JB")) == 3


def test_single_job_decode_uses_full_chain():
    inst = Instance(jobs=(Job("J1", (40, 20, 75, 45, 30, 45)),),
                    machines=tuple(equipment(1)))
    sch, value = decode(inst, JobOrder(("J1",)), Objective.CMAX)
    assert value == 255
    assert check_feasibility(inst, sch) == []


def test_decode_prefers_cluster_on_availability_tie():
    # One job, everything idle: the widest available tool wins the tie.
    inst = Instance(jobs=(Job("J1", (0, 20, 75, 0, 30, 45)),),
                    machines=tuple(equipment(2)))
    sch, _ = decode(inst, JobOrder(("J1",)), Objective.CMAX)
    assert sch.assign[("J1", 2)] == "CEDB1"
    assert sch.assign[("J1", 6)] == "CEDB1"


def test_decode_spills_to_individual_machines_under_load():
    jobs = tuple(Job(f"J{i}", (0, 20, 75, 0, 30, 0)) for i in range(1, 4))
    inst = Instance(jobs=jobs, machines=tuple(equipment(2)))
    sch, value = decode(inst, JobOrder(("J1", "J2", "J3")), Objective.CMAX)
    assert check_feasibility(inst, sch) == []
    # With the clusters busy, later jobs run on the individual line instead
    # of queueing, so the three jobs overlap.
    used = {sch.assign[(j.id, 2)] for j in jobs}
    assert len(used) == 3
    assert value < 3 * 125


def test_decode_respects_bake_route_restriction():
    jobs = tuple(Job(f"J{i}", (0, 20, 75, 45, 30, 45)) for i in range(1, 5))
    inst = Instance(jobs=jobs, machines=tuple(equipment(1)))
    sch, _ = decode(inst, JobOrder(tuple(j.id for j in jobs)), Objective.CMAX)
    assert check_feasibility(inst, sch) == []
    for j in jobs:
        cls = inst.machine(sch.assign[(j.id, 2)]).tool_class
        assert cls not in ("CED", "CEDB")


def test_decode_ed_requires_individual_coat():
    inst = generate_instance(GenConfig(n=6, equipment=1, seed=11))
    order = JobOrder(tuple(j.id for j in inst.jobs))
    sch, _ = decode(inst, order, Objective.CMAX)
    for j in inst.jobs:
        if inst.machine(sch.assign[(j.id, 3)]).tool_class == "ED":
            assert inst.machine(sch.assign[(j.id, 2)]).tool_class == "C"


def test_decode_always_feasible_randomized():
    rng = random.Random(99)
    for _ in range(60):
        n = rng.choice([2, 5, 9])
        inst = generate_instance(
            GenConfig(n=n, ready_scenario=ReadyScenario.MIXED_30_70,
                      equipment=rng.choice([1, 2]), seed=rng.randrange(10**6)))
        ids = [j.id for j in inst.jobs]
        rng.shuffle(ids)
        sch, value = decode(inst, JobOrder(tuple(ids)), Objective.CMAX)
        assert check_feasibility(inst, sch) == []
        assert value >= max(j.ready + j.total_time for j in inst.jobs)


def test_decode_deterministic():
    inst = generate_instance(GenConfig(n=7, equipment=1, seed=3))
    order = JobOrder(tuple(j.id for j in inst.jobs))
    a = decode(inst, order, Objective.WCT)
    b = decode(inst, order, Objective.WCT)
    assert a[1] == b[1]
    assert a[0].assign == b[0].assign
    assert a[0].completion == b[0].completion
