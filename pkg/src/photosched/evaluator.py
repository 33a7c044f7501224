"""Schedule representation, feasibility checking, and semi-active timing.

Feasibility mirrors the disjunctive structure of the optimization model:
ready-time release, stage chaining, one-job-at-a-time machine timelines
(cluster tools are reserved for a job's whole covered span, and the bake
ovens run stage-4 and stage-6 visits on a single shared timeline), and
the cluster routing rules.
"""

import csv
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .core import (
    CLUSTER_ENTRY,
    STAGES,
    Instance,
    Job,
    Machine,
    Objective,
)

Visit = Tuple[str, int]  # (job id, stage)


class ScheduleError(Exception):
    pass


class CyclicSequenceError(ScheduleError):
    def __init__(self, visits):
        self.visits = list(visits)
        super().__init__(f"inconsistent sequences: cycle through {self.visits}")


class InfeasibleScheduleError(ScheduleError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(v.detail for v in self.violations[:5])
        super().__init__(f"{len(self.violations)} violation(s): {lines}")


@dataclass(frozen=True)
class Violation:
    constraint_id: str  # ReadyTime, StageChain, MachineOverlap, MissingAssign,
    #                     ForbiddenAssign, ClusterSpan, ClusterExclusive, BakeShared
    detail: str


@dataclass
class Schedule:
    assign: Dict[Visit, str]  # (job, stage) -> machine id, stages with p > 0
    completion: Dict[Visit, int]  # (job, stage) -> completion time
    sequences: Dict[str, List[Visit]] = field(default_factory=dict)

    def start(self, instance: Instance, job_id: str, stage: int) -> int:
        return self.completion[(job_id, stage)] - instance.job(job_id).duration(stage)

    def completion_through(self, instance: Instance, job_id: str, stage: int) -> int:
        """Completion at `stage` with skipped stages chained through.

        A skipped stage inherits the previous stage's completion; stage 0
        is the job's ready time.
        """
        job = instance.job(job_id)
        for s in range(stage, 0, -1):
            if job.needs(s):
                return self.completion[(job_id, s)]
        return job.ready

    def last_completion(self, instance: Instance, job_id: str) -> int:
        return self.completion_through(instance, job_id, STAGES[-1])


@dataclass(frozen=True)
class ScheduleMetrics:
    cmax: int
    wct: int
    twt: int
    tardiness: Dict[str, int]


# ---------------------------------------------------------------------------
# Occupations: contiguous machine reservations

@dataclass
class Occupation:
    job_id: str
    machine_id: str
    stages: List[int]  # covered stages of this reservation, in flow order

    @property
    def entry(self) -> int:
        return self.stages[0]

    @property
    def exit(self) -> int:
        return self.stages[-1]


def _occupations(instance: Instance, assign: Dict[Visit, str]) -> Dict[str, List[Occupation]]:
    """Group assigned visits into machine reservations.

    On a cluster machine all of a job's visits form one reservation; on
    individual machines and bake ovens every visit stands alone.
    """
    by_machine: Dict[str, List[Occupation]] = defaultdict(list)
    per_pair: Dict[Tuple[str, str], Occupation] = {}
    for (job_id, stage), mid in sorted(assign.items(), key=lambda it: (it[0][0], it[0][1])):
        machine = instance.machine(mid)
        if machine.is_cluster:
            occ = per_pair.get((job_id, mid))
            if occ is None:
                occ = Occupation(job_id, mid, [])
                per_pair[(job_id, mid)] = occ
                by_machine[mid].append(occ)
            occ.stages.append(stage)
        else:
            by_machine[mid].append(Occupation(job_id, mid, [stage]))
    return by_machine


# ---------------------------------------------------------------------------
# Semi-active timing

def earliest_completion(instance: Instance, assign: Dict[Visit, str],
                        sequences: Dict[str, List[Visit]]) -> Schedule:
    """Forward-pass minimal completion times for fixed assignment/sequences.

    Each machine is a single timeline of reservations in sequence order;
    a cluster reservation holds the machine from its entry-stage start to
    its exit-stage completion.  Raises CyclicSequenceError when the
    per-machine orders contradict the job flow.
    """
    visits = sorted(assign)
    preds: Dict[Visit, List[Tuple[Visit, str]]] = {v: [] for v in visits}
    # kind "chain": C_v >= C_u + p_v; kind "machine": start_v >= C_u.
    base: Dict[Visit, int] = {}
    for job in instance.jobs:
        prev = None
        for s in job.stages:
            v = (job.id, s)
            if v not in preds:
                continue  # missing assignment; caller detects separately
            if prev is None:
                base[v] = job.ready
            else:
                preds[v].append((prev, "chain"))
            prev = v

    # Machine-order edges between consecutive reservations.
    occ_by_machine = _occupations(instance, assign)
    for mid, occs in occ_by_machine.items():
        order = _reservation_order(occs, sequences.get(mid, []))
        for a, b in zip(order, order[1:]):
            u = (a.job_id, a.exit)
            v = (b.job_id, b.entry)
            preds[v].append((u, "machine"))

    indeg = {v: len(ps) for v, ps in preds.items()}
    succs: Dict[Visit, List[Visit]] = defaultdict(list)
    for v, ps in preds.items():
        for u, _ in ps:
            succs[u].append(v)
    queue = deque(v for v, d in indeg.items() if d == 0)
    completion: Dict[Visit, int] = {}
    done = 0
    while queue:
        v = queue.popleft()
        job_id, stage = v
        p = instance.job(job_id).duration(stage)
        start = base.get(v, 0)
        for u, kind in preds[v]:
            start = max(start, completion[u])
        completion[v] = start + p
        done += 1
        for w in succs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if done != len(visits):
        raise CyclicSequenceError([v for v in visits if v not in completion])

    ordered = {
        mid: sorted(
            (v for v in visits if assign[v] == mid),
            key=lambda v: (completion[v] - instance.job(v[0]).duration(v[1]), v[1]),
        )
        for mid in occ_by_machine
    }
    return Schedule(assign=dict(assign), completion=completion, sequences=ordered)


def _reservation_order(occs: List[Occupation], sequence: List[Visit]) -> List[Occupation]:
    """Order reservations by the machine's visit sequence.

    Falls back to first-appearance order for visits missing from the
    sequence list.
    """
    pos = {v: i for i, v in enumerate(sequence)}
    ranked = []
    for i, occ in enumerate(occs):
        keys = [pos.get((occ.job_id, s)) for s in occ.stages]
        known = [k for k in keys if k is not None]
        ranked.append((min(known) if known else len(sequence) + i, occ))
    ranked.sort(key=lambda t: t[0])
    return [occ for _, occ in ranked]


# ---------------------------------------------------------------------------
# Feasibility

def check_feasibility(instance: Instance, schedule: Schedule) -> List[Violation]:
    """Return all constraint violations; an empty list means feasible."""
    out: List[Violation] = []
    assign = schedule.assign
    known_machines = {m.id for m in instance.machines}

    # Assignment structure: present exactly where p > 0, machine eligible.
    for job in instance.jobs:
        for s in STAGES:
            v = (job.id, s)
            if job.needs(s):
                if v not in assign:
                    out.append(Violation("MissingAssign",
                                         f"job {job.id} stage {s} unassigned"))
                elif assign[v] not in known_machines:
                    out.append(Violation("MissingAssign",
                                         f"job {job.id} stage {s} on unknown machine {assign[v]}"))
                elif not instance.machine(assign[v]).covers(s):
                    out.append(Violation("ForbiddenAssign",
                                         f"machine {assign[v]} cannot process stage {s} (job {job.id})"))
                elif v not in schedule.completion:
                    out.append(Violation("MissingAssign",
                                         f"job {job.id} stage {s} has no completion time"))
            elif v in assign:
                out.append(Violation("ForbiddenAssign",
                                     f"job {job.id} stage {s} assigned but needs no processing"))
    if out:
        structural = {v.constraint_id for v in out}
        if "MissingAssign" in structural:
            return out

    # Ready times and stage chaining.
    for job in instance.jobs:
        prev_c = job.ready
        first = True
        for s in job.stages:
            c = schedule.completion[(job.id, s)]
            if first and c < job.duration(s) + job.ready:
                out.append(Violation("ReadyTime",
                                     f"job {job.id} stage {s} starts before ready time {job.ready}"))
            if not first and c - prev_c < job.duration(s):
                out.append(Violation("StageChain",
                                     f"job {job.id} stage {s} overlaps its stage-{_prev_stage(job, s)} work"))
            prev_c = c
            first = False

    # Cluster routing rules.
    for job in instance.jobs:
        for s in job.stages:
            mid = assign[(job.id, s)]
            machine = instance.machine(mid)
            if not machine.is_cluster:
                continue
            if machine.tool_class in ("CEDB", "CED") and job.needs(4):
                out.append(Violation("ForbiddenAssign",
                                     f"job {job.id} needs stage 4 but is on {machine.tool_class} machine {mid}"))
            entry = CLUSTER_ENTRY[machine.tool_class]
            if s == entry:
                for cov in machine.covered_stages:
                    if cov == entry:
                        continue
                    if assign.get((job.id, cov)) != mid:
                        out.append(Violation("ClusterSpan",
                                             f"job {job.id} enters {mid} at stage {entry} "
                                             f"but stage {cov} is elsewhere"))
            elif assign.get((job.id, entry)) != mid:
                out.append(Violation("ClusterSpan",
                                     f"job {job.id} uses {mid} at stage {s} without entering at stage {entry}"))

    if any(v.constraint_id in ("ClusterSpan", "ForbiddenAssign") for v in out):
        return out

    # Machine exclusivity: reservations on one timeline must not overlap.
    for mid, occs in _occupations(instance, assign).items():
        machine = instance.machine(mid)
        intervals = []
        for occ in occs:
            s0 = schedule.start(instance, occ.job_id, occ.entry)
            c1 = schedule.completion[(occ.job_id, occ.exit)]
            intervals.append((s0, c1, occ))
        intervals.sort(key=lambda t: (t[0], t[1]))
        for (s0, c1, a), (s2, c3, b) in zip(intervals, intervals[1:]):
            if s2 < c1 and a.job_id != b.job_id:
                if machine.is_cluster:
                    tag = "ClusterExclusive"
                elif machine.tool_class == "B" and a.stages[0] != b.stages[0]:
                    tag = "BakeShared"
                else:
                    tag = "MachineOverlap"
                out.append(Violation(tag,
                                     f"jobs {a.job_id} (stage {a.stages}) and {b.job_id} "
                                     f"(stage {b.stages}) overlap on {mid}"))
            elif s2 < c1:
                out.append(Violation("MachineOverlap",
                                     f"job {a.job_id} overlaps itself on {mid}"))
    return out


def _prev_stage(job: Job, stage: int) -> int:
    prev = 0
    for s in job.stages:
        if s == stage:
            return prev
        prev = s
    return prev


# ---------------------------------------------------------------------------
# Objectives

def metrics(instance: Instance, schedule: Schedule) -> ScheduleMetrics:
    cmax = 0
    wct = 0
    twt = 0
    tardiness = {}
    for job in instance.jobs:
        c = schedule.last_completion(instance, job.id)
        cmax = max(cmax, c)
        wct += job.weight * c
        t = max(0, c - job.due)
        tardiness[job.id] = t
        twt += job.weight * t
    return ScheduleMetrics(cmax=cmax, wct=wct, twt=twt, tardiness=tardiness)


def objective_value(instance: Instance, schedule: Schedule, kind: Objective) -> int:
    """Objective of a schedule assumed feasible (no checking)."""
    m = metrics(instance, schedule)
    if kind == Objective.CMAX:
        return m.cmax
    if kind == Objective.WCT:
        return m.wct
    return m.twt


def objective(instance: Instance, schedule: Schedule, kind: Objective) -> int:
    """Objective of a feasible schedule; raises if any constraint is violated."""
    violations = check_feasibility(instance, schedule)
    if violations:
        raise InfeasibleScheduleError(violations)
    return objective_value(instance, schedule, kind)


# ---------------------------------------------------------------------------
# Schedule file format: job_id,stage,machine_id,start,completion

def save_schedule(instance: Instance, schedule: Schedule, path) -> None:
    rows = []
    for (job_id, stage), mid in schedule.assign.items():
        c = schedule.completion[(job_id, stage)]
        s = c - instance.job(job_id).duration(stage)
        rows.append((mid, s, job_id, stage, c))
    rows.sort()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["job_id", "stage", "machine_id", "start", "completion"])
        for mid, s, job_id, stage, c in rows:
            writer.writerow([job_id, stage, mid, s, c])


def load_schedule(path) -> Schedule:
    assign: Dict[Visit, str] = {}
    completion: Dict[Visit, int] = {}
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            job_id = rec["job_id"]
            stage = int(rec["stage"])
            mid = rec["machine_id"]
            start = int(rec["start"])
            c = int(rec["completion"])
            assign[(job_id, stage)] = mid
            completion[(job_id, stage)] = c
            rows.append((mid, start, stage, job_id))
    rows.sort()
    sequences: Dict[str, List[Visit]] = defaultdict(list)
    for mid, start, stage, job_id in rows:
        sequences[mid].append((job_id, stage))
    return Schedule(assign=assign, completion=completion, sequences=dict(sequences))
