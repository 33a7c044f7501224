"""Batch experiment harness: instance grid, solver runs, PR/HR aggregation.

PR (performance ratio) compares a heuristic value against a proven
optimum; HR (heuristic ratio) compares it against the best incumbent of a
time-limited exact run.
"""

import csv
import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .core import Instance, Objective
from .exact import OPTIMAL, TIMED_OUT, solve_exact
from .instgen import GenConfig, ReadyScenario, generate_instance
from .search import GAConfig, SPConfig, run_ga, run_sp

FAILED = "failed"

DEFAULT_GRID = {
    "n": [5, 15, 25],
    "ready": ["zero", "mixed"],
    "T": [0.3, 0.6],
    "R": [0.5, 2.5],
    "equipment": [1, 2],
}


@dataclass
class ExperimentRecord:
    n: int
    ready: str
    T: float
    R: float
    mc: int
    rep: int
    objective: str
    of_sp: int
    of_ga: int
    of_exact: Optional[int]
    exact_status: str
    runtimes: Dict[str, float] = field(default_factory=dict)

    @property
    def cell(self) -> Tuple[int, str, float, float, int]:
        return (self.n, self.ready, self.T, self.R, self.mc)


@dataclass(frozen=True)
class AggregateRow:
    pattern: Tuple
    mean: Optional[float]
    count: int
    excluded_zero: int = 0

    def formatted(self) -> str:
        if self.mean is None:
            return f"N/A ({self.count})"
        return f"{self.mean:.2f} ({self.count})"


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit seed from the master seed and a cell/replication key."""
    key = f"{master_seed}:" + ":".join(str(p) for p in parts)
    return random.Random(key).getrandbits(64)


def run_grid(grid: dict, objectives: Iterable[Objective], replications: int,
             master_seed: int, exact_time_limit: float = 60.0,
             sp_iterations: int = 1000,
             ga: Optional[GAConfig] = None,
             run_exact: bool = True) -> List[ExperimentRecord]:
    """Run every (cell, replication, objective) combination deterministically.

    Solver failures are recorded with status "failed" and the run continues.
    """
    records: List[ExperimentRecord] = []
    cells = list(itertools.product(grid["n"], grid["ready"], grid["T"],
                                   grid["R"], grid["equipment"]))
    for (n, ready, T, R, mc) in cells:
        for rep in range(1, replications + 1):
            seed = derive_seed(master_seed, n, ready, T, R, mc, rep)
            config = GenConfig(n=n, ready_scenario=ReadyScenario(ready),
                               T=T, R=R, equipment=mc, seed=seed)
            instance = generate_instance(config)
            for kind in objectives:
                records.append(
                    _run_one(instance, kind, n, ready, T, R, mc, rep,
                             master_seed, exact_time_limit, sp_iterations,
                             ga, run_exact))
    return records


def _run_one(instance: Instance, kind: Objective, n, ready, T, R, mc, rep,
             master_seed, exact_time_limit, sp_iterations, ga,
             run_exact) -> ExperimentRecord:
    runtimes = {}
    solver_seed = derive_seed(master_seed, n, ready, T, R, mc, rep, kind.value)

    t0 = time.perf_counter()
    _, of_sp, _ = run_sp(instance, kind,
                         SPConfig(max_iterations=sp_iterations, seed=solver_seed))
    runtimes["sp"] = time.perf_counter() - t0

    ga_config = ga or GAConfig()
    t0 = time.perf_counter()
    _, of_ga, _ = run_ga(instance, kind,
                         GAConfig(pop_size=ga_config.pop_size,
                                  max_generations=ga_config.max_generations,
                                  stall_window=ga_config.stall_window,
                                  stall_tolerance=ga_config.stall_tolerance,
                                  seed=solver_seed))
    runtimes["ga"] = time.perf_counter() - t0

    of_exact = None
    status = FAILED
    if run_exact:
        t0 = time.perf_counter()
        try:
            result = solve_exact(instance, kind, time_limit=exact_time_limit)
            of_exact = result.value
            status = result.status
        except Exception:
            status = FAILED
        runtimes["exact"] = time.perf_counter() - t0

    return ExperimentRecord(n=n, ready=ready, T=T, R=R, mc=mc, rep=rep,
                            objective=kind.value, of_sp=of_sp, of_ga=of_ga,
                            of_exact=of_exact, exact_status=status,
                            runtimes=runtimes)


def performance_ratio(record: ExperimentRecord, solver: str = "ga") -> Optional[float]:
    """Heuristic value over proven optimum; None when undefined."""
    if record.exact_status != OPTIMAL or record.of_exact is None:
        return None
    if record.of_exact == 0:
        return None
    value = record.of_ga if solver == "ga" else record.of_sp
    return value / record.of_exact


def heuristic_ratio(record: ExperimentRecord, solver: str = "ga") -> Optional[float]:
    """Heuristic value over the time-limited incumbent; None when undefined."""
    if record.exact_status != TIMED_OUT or record.of_exact is None:
        return None
    if record.of_exact == 0:
        return None
    value = record.of_ga if solver == "ga" else record.of_sp
    return value / record.of_exact


def matches(record: ExperimentRecord, pattern: Tuple) -> bool:
    return all(p == "*" or p == v for p, v in zip(pattern, record.cell))


def aggregate(records: List[ExperimentRecord], pattern: Tuple,
              objective: Objective, solver: str = "ga",
              ratio: str = "pr") -> AggregateRow:
    """Mean PR or HR over records matching the wildcard pattern."""
    fn = performance_ratio if ratio == "pr" else heuristic_ratio
    wanted = OPTIMAL if ratio == "pr" else TIMED_OUT
    values = []
    excluded = 0
    for rec in records:
        if rec.objective != objective.value or not matches(rec, pattern):
            continue
        if rec.exact_status != wanted:
            continue
        r = fn(rec, solver)
        if r is None:
            excluded += 1
        else:
            values.append(r)
    mean = sum(values) / len(values) if values else None
    return AggregateRow(pattern=pattern, mean=mean, count=len(values),
                        excluded_zero=excluded)


def summary_patterns(n: int) -> List[Tuple]:
    return [
        (n, "zero", "*", "*", "*"),
        (n, "mixed", "*", "*", "*"),
        (n, "*", 0.3, "*", "*"),
        (n, "*", 0.6, "*", "*"),
        (n, "*", "*", 0.5, "*"),
        (n, "*", "*", 2.5, "*"),
        (n, "*", "*", "*", 1),
        (n, "*", "*", "*", 2),
    ]


def format_summary(records: List[ExperimentRecord], n_values: Iterable[int],
                   ratio: str = "pr") -> str:
    """Tables-style summary: one row per pattern, mean (count) per cell."""
    header = f"{'pattern':<24}" + "".join(
        f"{s + ' ' + k.value:>14}"
        for s in ("ga", "sp") for k in Objective)
    lines = [header]
    for n in n_values:
        for pattern in summary_patterns(n):
            cells = []
            for solver in ("ga", "sp"):
                for kind in Objective:
                    row = aggregate(records, pattern, kind, solver, ratio)
                    cells.append(f"{row.formatted():>14}")
            name = "(" + ",".join("*" if p == "*" else str(p) for p in pattern) + ")"
            lines.append(f"{name:<24}" + "".join(cells))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Record files: deterministic values file plus a separate timings file

RECORD_FIELDS = ["n", "ready", "T", "R", "mc", "rep", "objective",
                 "of_sp", "of_ga", "of_exact", "exact_status"]


def save_records(records: List[ExperimentRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow([r.n, r.ready, r.T, r.R, r.mc, r.rep, r.objective,
                             r.of_sp, r.of_ga,
                             "" if r.of_exact is None else r.of_exact,
                             r.exact_status])


def save_timings(records: List[ExperimentRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "ready", "T", "R", "mc", "rep", "objective",
                         "solver", "seconds"])
        for r in records:
            for solver, seconds in sorted(r.runtimes.items()):
                writer.writerow([r.n, r.ready, r.T, r.R, r.mc, r.rep,
                                 r.objective, solver, f"{seconds:.3f}"])


def load_records(path) -> List[ExperimentRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ExperimentRecord(
                n=int(row["n"]), ready=row["ready"], T=float(row["T"]),
                R=float(row["R"]), mc=int(row["mc"]), rep=int(row["rep"]),
                objective=row["objective"], of_sp=int(row["of_sp"]),
                of_ga=int(row["of_ga"]),
                of_exact=int(row["of_exact"]) if row["of_exact"] else None,
                exact_status=row["exact_status"]))
    return out
