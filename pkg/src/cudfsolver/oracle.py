"""Exhaustive ground truth for small universes.

Every subset of package ids is checked with :func:`checker.check`; no pruning,
no shortcuts, so that disagreements point at the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional, Sequence

from .checker import check
from .criteria import CriteriaList, objective_vector, sort_key
from .model import NoSolution, PackageId, Request, Solution, Universe

DEFAULT_CAP = 20


class CapExceeded(Exception):
    def __init__(self, size: int, cap: int):
        super().__init__(f"universe has {size} package versions, oracle cap is {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class OptimalResult:
    vector: tuple[int, ...]
    solutions: tuple[Solution, ...]  # all optimal solutions, in enumeration order

    @property
    def witness(self) -> Solution:
        return self.solutions[0]


def subsets(ids: Sequence[PackageId]) -> Iterator[frozenset[PackageId]]:
    """All subsets by increasing size, then lexicographically."""
    for k in range(len(ids) + 1):
        for combo in combinations(ids, k):
            yield frozenset(combo)


def feasible_solutions(u: Universe, r: Request, cap: int = DEFAULT_CAP) -> list[frozenset[PackageId]]:
    if len(u) > cap:
        raise CapExceeded(len(u), cap)
    return [s for s in subsets(u.ids) if check(u, r, s).valid]


def rank(u: Universe, feasible: Sequence[frozenset[PackageId]], criteria: CriteriaList):
    if not feasible:
        return NoSolution
    best_key = None
    best: list[frozenset[PackageId]] = []
    best_vec: Optional[tuple[int, ...]] = None
    for s in feasible:
        vec = objective_vector(u, criteria, s)
        key = sort_key(criteria, vec)
        if best_key is None or key < best_key:
            best_key, best_vec, best = key, vec, [s]
        elif key == best_key:
            best.append(s)
    return OptimalResult(best_vec, tuple(Solution(s) for s in best))


def brute_force(u: Universe, r: Request, criteria: CriteriaList, cap: int = DEFAULT_CAP):
    """Return an :class:`OptimalResult`, or ``NoSolution`` if nothing is valid."""
    return rank(u, feasible_solutions(u, r, cap), criteria)


def brute_force_many(u: Universe, r: Request, criteria_lists: Sequence[CriteriaList],
                     cap: int = DEFAULT_CAP) -> list:
    """Like :func:`brute_force` for several criteria lists, enumerating once."""
    feasible = feasible_solutions(u, r, cap)
    return [rank(u, feasible, c) for c in criteria_lists]
