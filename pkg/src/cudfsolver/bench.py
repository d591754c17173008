"""Scalability benchmark over generated universes."""

from __future__ import annotations

import csv
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence, TextIO

from .criteria import CriteriaList, format_criteria, objective_vector, parse_criteria
from .gen import gen_request, gen_universe
from .model import NoSolution
from .optimizer import Budget, LexOptimizer, Unknown

CSV_FIELDS = (
    "size", "seed", "criteria", "outcome", "objective", "variables", "clauses",
    "conflicts", "decisions", "solver_calls", "seconds",
)
OUTCOME_FIELDS = CSV_FIELDS[:-1]


@dataclass
class BenchRow:
    size: int
    seed: int
    criteria: str
    outcome: str
    objective: str
    variables: int
    clauses: int
    conflicts: int
    decisions: int
    solver_calls: int
    seconds: float

    def outcome_columns(self) -> tuple:
        return tuple(getattr(self, f) for f in OUTCOME_FIELDS)


def bench_one(size: int, seed: int, criteria: CriteriaList, budget: Budget = Budget()) -> BenchRow:
    u = gen_universe(n_packages=size, seed=seed)
    r = gen_request(u, "mixed", seed)
    opt = LexOptimizer(u, r, criteria, budget)
    result = opt.run()
    if result is NoSolution:
        outcome, objective = "FAIL", ""
    elif isinstance(result, Unknown):
        outcome = "UNKNOWN"
        objective = "" if result.best is None else ",".join(
            map(str, objective_vector(u, criteria, result.best)))
    else:
        outcome = "SOLUTION"
        objective = ",".join(map(str, objective_vector(u, criteria, result)))
    st = opt.stats
    return BenchRow(size, seed, format_criteria(criteria), outcome, objective, st.variables,
                    st.clauses, st.conflicts, st.decisions, st.solver_calls, round(st.seconds, 4))


def _bench_star(job):
    size, seed, crit = job
    return bench_one(size, seed, parse_criteria(crit))


def run_bench(sizes: Sequence[int], seeds: Sequence[int], criteria: CriteriaList,
              jobs: int = 1) -> list[BenchRow]:
    """One row per (size, seed), in input order. Runs sequentially unless *jobs* > 1."""
    work = [(size, seed, format_criteria(criteria)) for size in sizes for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_bench_star, work))
    return [_bench_star(job) for job in work]


def medians(rows: Sequence[BenchRow]) -> dict[int, dict[str, float]]:
    out: dict[int, dict[str, float]] = {}
    for size in sorted({r.size for r in rows}):
        group = [r for r in rows if r.size == size]
        out[size] = {
            "clauses": statistics.median(r.clauses for r in group),
            "variables": statistics.median(r.variables for r in group),
            "seconds": statistics.median(r.seconds for r in group),
        }
    return out


def format_table(rows: Sequence[BenchRow]) -> str:
    header = ("size", "seed", "outcome", "objective", "vars", "clauses", "conflicts",
              "decisions", "calls", "seconds")
    body = [
        (r.size, r.seed, r.outcome, r.objective or "-", r.variables, r.clauses,
         r.conflicts, r.decisions, r.solver_calls, f"{r.seconds:.3f}")
        for r in rows
    ]
    cells = [tuple(map(str, header))] + [tuple(map(str, b)) for b in body]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    summary = medians(rows)
    lines.append("")
    for size, m in summary.items():
        lines.append(f"median size={size}: clauses={m['clauses']:g} "
                     f"vars={m['variables']:g} seconds={m['seconds']:.3f}")
    return "\n".join(lines)


def write_csv(rows: Sequence[BenchRow], out: TextIO) -> None:
    w = csv.DictWriter(out, fieldnames=CSV_FIELDS)
    w.writeheader()
    for r in rows:
        w.writerow(asdict(r))
