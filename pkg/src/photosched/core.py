"""Domain model for a six-stage photolithography line with cluster tools.

Stages are numbered 1..6: sink, coat, expose, bake (pre-develop), develop,
bake (post-develop).  The two bake stages share the same pool of ovens, so
a lot can revisit an oven it used earlier in its flow.
"""

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, List, Tuple

N_STAGES = 6
STAGES = tuple(range(1, N_STAGES + 1))

SINK, COAT, EXPOSE, BAKE_PRE, DEVELOP, BAKE_POST = STAGES

# Stage set served by each tool class.  B ovens serve both bake stages as
# independent visits; the multi-stage classes CE/CED/CEDB/ED are cluster
# tools that hold a single lot for their entire covered span.
TOOL_STAGES: Dict[str, Tuple[int, ...]] = {
    "S": (1,),
    "C": (2,),
    "E": (3,),
    "D": (5,),
    "B": (4, 6),
    "CE": (2, 3),
    "CED": (2, 3, 5),
    "CEDB": (2, 3, 5, 6),
    "ED": (3, 5),
}

CLUSTER_CLASSES = ("CE", "CED", "CEDB", "ED")

# First covered stage of each cluster class; a lot commits to the cluster
# machine when it reaches this stage.
CLUSTER_ENTRY = {"CE": 2, "CED": 2, "CEDB": 2, "ED": 3}

# Classes whose machines may process each stage.
STAGE_CLASSES: Dict[int, Tuple[str, ...]] = {
    1: ("S",),
    2: ("C", "CE", "CED", "CEDB"),
    3: ("E", "CE", "CED", "CEDB", "ED"),
    4: ("B",),
    5: ("D", "CED", "CEDB", "ED"),
    6: ("B", "CEDB"),
}


class Objective(str, Enum):
    CMAX = "cmax"
    WCT = "wct"
    TWT = "twt"


@dataclass(frozen=True)
class Machine:
    id: str
    tool_class: str

    def __post_init__(self):
        if self.tool_class not in TOOL_STAGES:
            raise ValueError(f"unknown tool class {self.tool_class!r}")

    @property
    def covered_stages(self) -> Tuple[int, ...]:
        return TOOL_STAGES[self.tool_class]

    @property
    def is_cluster(self) -> bool:
        return self.tool_class in CLUSTER_ENTRY

    def covers(self, stage: int) -> bool:
        return stage in TOOL_STAGES[self.tool_class]


@dataclass(frozen=True)
class Job:
    id: str
    p: Tuple[int, ...]  # processing minutes per stage, index 0 = stage 1
    ready: int = 0
    due: int = 0
    weight: int = 1

    def __post_init__(self):
        if len(self.p) != N_STAGES:
            raise ValueError(f"job {self.id}: expected {N_STAGES} stage times")
        if any(t < 0 for t in self.p):
            raise ValueError(f"job {self.id}: negative processing time")
        if self.ready < 0 or self.due < 0:
            raise ValueError(f"job {self.id}: negative ready/due time")

    def duration(self, stage: int) -> int:
        return self.p[stage - 1]

    def needs(self, stage: int) -> bool:
        return self.p[stage - 1] > 0

    @property
    def stages(self) -> Tuple[int, ...]:
        """Stages with positive processing time, in flow order."""
        return tuple(s for s in STAGES if self.p[s - 1] > 0)

    @property
    def total_time(self) -> int:
        return sum(self.p)


@dataclass(frozen=True)
class Instance:
    jobs: Tuple[Job, ...]
    machines: Tuple[Machine, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))
        object.__setattr__(self, "machines", tuple(self.machines))
        jids = [j.id for j in self.jobs]
        mids = [m.id for m in self.machines]
        if len(set(jids)) != len(jids):
            raise ValueError("duplicate job ids")
        if len(set(mids)) != len(mids):
            raise ValueError("duplicate machine ids")
        for job in self.jobs:
            for s in job.stages:
                if not any(m.covers(s) for m in self.machines):
                    raise ValueError(f"no machine can process stage {s}")

    def job(self, job_id: str) -> Job:
        return self._job_index[job_id]

    def machine(self, machine_id: str) -> Machine:
        return self._machine_index[machine_id]

    @cached_property
    def _job_index(self) -> Dict[str, Job]:
        return {j.id: j for j in self.jobs}

    @cached_property
    def _machine_index(self) -> Dict[str, Machine]:
        return {m.id: m for m in self.machines}

    def machines_of_class(self, tool_class: str) -> List[Machine]:
        return [m for m in self.machines if m.tool_class == tool_class]


@dataclass(frozen=True)
class RouteChoice:
    """One consistent way of covering a job's coat/expose/develop block.

    ``family`` is "individual" or the cluster class used; ``stage_class``
    maps each needed stage to the tool class that serves it.
    """

    family: str
    stage_class: Tuple[Tuple[int, str], ...]

    def tool_class_for(self, stage: int) -> str:
        for s, c in self.stage_class:
            if s == stage:
                return c
        raise KeyError(stage)

    @property
    def stages(self) -> Tuple[int, ...]:
        return tuple(s for s, _ in self.stage_class)


def eligible_machines(instance: Instance, stage: int) -> List[Machine]:
    """Machines whose tool class serves the given stage."""
    if stage not in STAGE_CLASSES:
        raise ValueError(f"stage must be in 1..{N_STAGES}, got {stage}")
    classes = STAGE_CLASSES[stage]
    return [m for m in instance.machines if m.tool_class in classes]


def _route(job: Job, family: str, block: Dict[int, str]) -> RouteChoice:
    mapping = {}
    for s in job.stages:
        if s in block:
            mapping[s] = block[s]
        elif s == 1:
            mapping[s] = "S"
        else:  # bake stages
            mapping[s] = "B"
    return RouteChoice(family, tuple(sorted(mapping.items())))


def route_options(job: Job) -> List[RouteChoice]:
    """Enumerate the consistent individual/cluster routings for a job.

    A job needing the pre-develop bake cannot use CEDB or CED (the bake
    oven sits outside those tools), and CEDB is only possible when the
    post-develop bake is actually required, since the tool always runs
    its final bake step.
    """
    if not (job.needs(2) and job.needs(3) and job.needs(5)):
        raise ValueError(f"job {job.id}: coat/expose/develop must be positive")
    routes = [_route(job, "individual", {2: "C", 3: "E", 5: "D"})]
    routes.append(_route(job, "CE", {2: "CE", 3: "CE", 5: "D"}))
    if not job.needs(4):
        routes.append(_route(job, "CED", {2: "CED", 3: "CED", 5: "CED"}))
        if job.needs(6):
            routes.append(
                _route(job, "CEDB", {2: "CEDB", 3: "CEDB", 5: "CEDB", 6: "CEDB"})
            )
    routes.append(_route(job, "ED", {2: "C", 3: "ED", 5: "ED"}))
    return routes


def big_m(instance: Instance) -> int:
    """Disjunctive big-M constant: total processing time over all jobs."""
    if not instance.jobs:
        raise ValueError("instance has no jobs")
    return sum(job.total_time for job in instance.jobs)


# ---------------------------------------------------------------------------
# Instance file format (versioned JSON)

FILE_VERSION = 1


def instance_to_dict(instance: Instance) -> dict:
    return {
        "version": FILE_VERSION,
        "label": instance.label,
        "machines": [{"id": m.id, "class": m.tool_class} for m in instance.machines],
        "jobs": [
            {"id": j.id, "p": list(j.p), "r": j.ready, "d": j.due, "w": j.weight}
            for j in instance.jobs
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    if data.get("version") != FILE_VERSION:
        raise ValueError(f"unsupported instance file version {data.get('version')!r}")
    machines = tuple(Machine(m["id"], m["class"]) for m in data["machines"])
    jobs = tuple(
        Job(j["id"], tuple(int(t) for t in j["p"]), int(j["r"]), int(j["d"]), int(j["w"]))
        for j in data["jobs"]
    )
    return Instance(jobs=jobs, machines=machines, label=data.get("label", ""))


def save_instance(instance: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))
