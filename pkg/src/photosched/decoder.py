"""Greedy schedule construction from a job permutation.

Jobs are placed in list order; each needed stage goes to the machine that
can start it earliest, preferring the machine covering the most stages
when several tie.  Picking a cluster machine commits the job's covered
stages to it and reserves the tool for the whole span.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

from .core import (
    CLUSTER_ENTRY,
    Instance,
    Job,
    Machine,
    Objective,
    STAGES,
    route_options,
)
from .evaluator import Schedule, Visit, objective_value


class DecodeError(Exception):
    pass


@dataclass(frozen=True)
class JobOrder:
    order: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        if len(set(self.order)) != len(self.order):
            raise ValueError("job order contains duplicates")

    def __iter__(self):
        return iter(self.order)

    def __len__(self):
        return len(self.order)


def cluster_affinity(instance: Instance, job: Job) -> int:
    """Number of cluster machines the job could be routed through."""
    classes = set()
    for route in route_options(job):
        for _, cls in route.stage_class:
            if cls in CLUSTER_ENTRY:
                classes.add(cls)
    return sum(1 for m in instance.machines if m.tool_class in classes)


def _candidates(instance: Instance, job: Job, stage: int,
                used_individual_coat: bool) -> List[Machine]:
    """Machines the job may commit to when it reaches `stage` uncovered."""
    out = []
    for machine in instance.machines:
        cls = machine.tool_class
        if not machine.covers(stage):
            continue
        if cls in CLUSTER_ENTRY:
            if CLUSTER_ENTRY[cls] != stage:
                continue  # clusters are entered at their first covered stage
            if cls in ("CEDB", "CED") and job.needs(4):
                continue
            if cls == "CEDB" and not job.needs(6):
                continue
            if cls == "ED" and not used_individual_coat:
                continue
        out.append(machine)
    return out


def decode(instance: Instance, order: JobOrder,
           kind: Objective) -> Tuple[Schedule, int]:
    """Build a feasible schedule for the permutation and score it."""
    if sorted(order) != sorted(j.id for j in instance.jobs):
        raise DecodeError("order is not a permutation of the instance's jobs")

    free: Dict[str, int] = {m.id: 0 for m in instance.machines}
    assign: Dict[Visit, str] = {}
    completion: Dict[Visit, int] = {}
    sequences: Dict[str, List[Visit]] = {m.id: [] for m in instance.machines}

    for job_id in order:
        job = instance.job(job_id)
        committed: Dict[int, str] = {}  # covered stages from a cluster pick
        used_individual_coat = False
        prev_c = job.ready
        for stage in job.stages:
            if stage in committed:
                mid = committed[stage]
                start = prev_c  # tool already held by this job
            else:
                cands = _candidates(instance, job, stage, used_individual_coat)
                if not cands:
                    raise DecodeError(f"no eligible machine for job {job_id} stage {stage}")
                best = min(
                    cands,
                    key=lambda m: (max(free[m.id], prev_c),
                                   -len(m.covered_stages), m.id),
                )
                mid = best.id
                start = max(free[mid], prev_c)
                if best.is_cluster:
                    for cov in best.covered_stages:
                        if cov > stage:
                            committed[cov] = mid
                elif stage == 2:
                    used_individual_coat = True
            c = start + job.duration(stage)
            assign[(job_id, stage)] = mid
            completion[(job_id, stage)] = c
            sequences[mid].append((job_id, stage))
            free[mid] = c
            prev_c = c

    schedule = Schedule(assign=assign, completion=completion,
                        sequences={m: v for m, v in sequences.items() if v})
    return schedule, objective_value(instance, schedule, kind)
