"""Random instance generator for the photolithography scheduling benchmark.

Reproduces the experimental design grid: fixed per-stage processing times
with Bernoulli skip probabilities at stages 1/4/6, two equipment levels,
two ready-time scenarios, and due dates drawn around an estimated
makespan scaled by the tardiness factor T and range factor R.
"""

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Tuple

from .core import Instance, Job, Machine, TOOL_STAGES

# Processing-time design: (always-on time, optional time, probability on).
STAGE_TIMES = {
    1: (40, 0.8),
    2: (20, 1.0),
    3: (75, 1.0),
    4: (45, 0.2),
    5: (30, 1.0),
    6: (45, 0.5),
}

BOTTLENECK_STAGE = 3
BOTTLENECK_TIME = 75
# Sum of the maximal times of the non-bottleneck stages.
NON_BOTTLENECK_TIME = 40 + 20 + 45 + 30 + 45

# Machine counts per tool class for the two equipment levels.
EQUIPMENT_COUNTS = {
    1: {"S": 4, "C": 2, "E": 4, "D": 2, "B": 3, "CE": 2, "CED": 2, "CEDB": 2, "ED": 1},
    2: {"S": 2, "C": 1, "E": 2, "D": 1, "B": 2, "CE": 1, "CED": 1, "CEDB": 1, "ED": 1},
}


class ReadyScenario(str, Enum):
    ALL_ZERO = "zero"
    MIXED_30_70 = "mixed"


@dataclass(frozen=True)
class GenConfig:
    n: int
    ready_scenario: ReadyScenario = ReadyScenario.ALL_ZERO
    T: float = 0.3
    R: float = 0.5
    equipment: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.equipment not in EQUIPMENT_COUNTS:
            raise ValueError("equipment scenario must be 1 or 2")


@dataclass(frozen=True)
class CmaxEstimate:
    """Estimated makespan 1.5 * (n * p_bn / m_ibn + p_nbn)."""

    value: Fraction
    p_bn: int
    m_ibn: int
    p_nbn: int


def equipment(scenario: int) -> List[Machine]:
    """Machine park for equipment scenario 1 or 2."""
    counts = EQUIPMENT_COUNTS[scenario]
    machines = []
    for cls in TOOL_STAGES:
        for i in range(1, counts[cls] + 1):
            machines.append(Machine(id=f"{cls}{i}", tool_class=cls))
    return machines


def gen_processing(rng: random.Random) -> Tuple[int, ...]:
    """Draw one job's six stage times."""
    p = []
    for stage in range(1, 7):
        t, prob = STAGE_TIMES[stage]
        p.append(t if rng.random() < prob else 0)
    return tuple(p)


def estimate_cmax(n: int, machines: List[Machine]) -> CmaxEstimate:
    m_ibn = sum(1 for m in machines if m.covers(BOTTLENECK_STAGE))
    if m_ibn == 0:
        raise ValueError("no machine covers the bottleneck stage")
    value = Fraction(3, 2) * (n * Fraction(BOTTLENECK_TIME, m_ibn) + NON_BOTTLENECK_TIME)
    return CmaxEstimate(value=value, p_bn=BOTTLENECK_TIME, m_ibn=m_ibn,
                        p_nbn=NON_BOTTLENECK_TIME)


def _round_half_up(x: Fraction) -> int:
    return int((2 * x + 1) // 2)


def gen_ready(rng: random.Random, scenario: ReadyScenario,
              cmax_estimate: CmaxEstimate, n: int) -> List[int]:
    if scenario == ReadyScenario.ALL_ZERO:
        return [0] * n
    # 30% of jobs (rounded half toward more zeros) released immediately.
    n_zero = int(Fraction(3, 10) * n + Fraction(1, 2))
    zero_jobs = set(rng.sample(range(n), min(n_zero, n)))
    upper = int(Fraction(2, 3) * cmax_estimate.value)
    ready = []
    for k in range(n):
        if k in zero_jobs or upper < 1:
            ready.append(0)
        else:
            ready.append(rng.randint(1, upper))
    return ready


def gen_due(rng: random.Random, T: float, R: float,
            cmax_estimate: CmaxEstimate) -> int:
    mu = cmax_estimate.value * (1 - Fraction(str(T)))
    half = Fraction(str(R)) / 2
    lo = max(0, _round_half_up(mu * (1 - half)))
    hi = max(lo, _round_half_up(mu * (1 + half)))
    return rng.randint(lo, hi)


def gen_weights(rng: random.Random, n: int) -> List[int]:
    return [rng.randint(1, 5) for _ in range(n)]


def generate_instance(config: GenConfig) -> Instance:
    """Deterministically build one instance from its design-cell config."""
    rng = random.Random(config.seed)
    machines = equipment(config.equipment)
    est = estimate_cmax(config.n, machines)

    p_list = [gen_processing(rng) for _ in range(config.n)]
    ready = gen_ready(rng, config.ready_scenario, est, config.n)
    due = [gen_due(rng, config.T, config.R, est) for _ in range(config.n)]
    weights = gen_weights(rng, config.n)

    jobs = tuple(
        Job(id=f"J{k + 1}", p=p_list[k], ready=ready[k], due=due[k],
            weight=weights[k])
        for k in range(config.n)
    )
    label = (f"n{config.n}-r_{config.ready_scenario.value}-T{config.T}"
             f"-R{config.R}-mc{config.equipment}-seed{config.seed}")
    return Instance(jobs=jobs, machines=tuple(machines), label=label)
