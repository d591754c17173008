"""Lexicographic optimization of upgrade problems over the CDCL core."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .criteria import CriteriaList, Sense, objective_vector
from .encoder import (
    ClauseSet,
    Totalizer,
    VarMap,
    build_objective,
    encode_keep,
    encode_request,
    encode_universe,
    expand_weights,
)
from .model import NoSolution, PackageId, Request, Solution, Universe
from .sat import ConflictAtLevelZero, Solver, Status

log = logging.getLogger(__name__)

DEFAULT_CONFLICT_BUDGET = 1_000_000


@dataclass(frozen=True)
class Budget:
    conflicts: int = DEFAULT_CONFLICT_BUDGET


@dataclass(frozen=True)
class Unknown:
    """Budget ran out; *best* is the best feasible solution seen, if any."""

    best: Optional[Solution] = None


@dataclass
class SolveStats:
    variables: int = 0
    clauses: int = 0
    solver_calls: int = 0
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    layer_values: list[int] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def encode_size(self) -> int:
        return self.clauses


class _OutOfBudget(Exception):
    pass


class LexOptimizer:
    """One-shot solver for a (universe, request, criteria) triple.

    Layers are optimized in priority order. Each layer's optimum is found by
    binary search on a totalizer bound passed as an assumption, then frozen
    with a permanent unit clause before the next layer starts.
    """

    def __init__(self, u: Universe, r: Request, criteria: CriteriaList,
                 budget: Optional[Budget] = None, canonical: bool = True):
        self.u = u
        self.r = r or Request()
        self.criteria = criteria
        self.budget = budget or Budget()
        self.canonical = canonical
        self.stats = SolveStats()
        self.vm = VarMap(u)
        self.solver = Solver()
        self.model: Optional[list[bool]] = None

    # -- helpers ---------------------------------------------------------------

    def _add(self, clauses) -> None:
        self.solver.ensure_vars(self.vm.top)
        for c in clauses:
            self.solver.add_clause(c)

    def _solve(self, assumptions=()):
        left = self.budget.conflicts - self.solver.conflicts
        if left <= 0:
            raise _OutOfBudget()
        self.stats.solver_calls += 1
        res = self.solver.solve(assumptions, conflict_budget=left)
        if res.status is Status.UNKNOWN:
            raise _OutOfBudget()
        if res.sat:
            self.model = res.model
        return res.sat

    def _solution(self) -> Solution:
        return Solution(self.vm.solution_ids(self.model))

    # -- main loop ---------------------------------------------------------------

    def run(self):
        start = time.perf_counter()
        try:
            return self._run()
        except _OutOfBudget:
            log.info("conflict budget exhausted")
            return Unknown(self._solution() if self.model is not None else None)
        finally:
            st = self.solver.stats()
            self.stats.conflicts = st["conflicts"]
            self.stats.decisions = st["decisions"]
            self.stats.propagations = st["propagations"]
            self.stats.seconds = time.perf_counter() - start

    def _run(self):
        u, vm = self.u, self.vm
        base = ClauseSet()
        base += encode_universe(u, vm)
        base += encode_request(u, vm, self.r)
        base += encode_keep(u, vm)
        self.stats.variables = vm.top
        self.stats.clauses = len(base)

        # start the search from the current installation
        self.solver.ensure_vars(vm.top)
        initial = u.initial_installation()
        for pid, var in vm.index.items():
            self.solver.set_polarity(var, pid in initial)
        try:
            self._add(base)
        except ConflictAtLevelZero:
            return NoSolution
        if not self._solve():
            return NoSolution

        for criterion in self.criteria:
            layer = build_objective(u, vm, criterion)
            self.stats.variables = vm.top
            self.stats.clauses += len(layer.defining_clauses)
            self._add(layer.defining_clauses)
            if not layer.terms:
                self.stats.layer_values.append(0)
                continue
            # definitions only constrain fresh aux vars: still satisfiable
            self._solve()
            if criterion.sense is Sense.MINIMIZE:
                lits = expand_weights(layer.terms)
            else:
                lits = expand_weights((w, -lit) for w, lit in layer.terms)
            best = self._minimize(lits)
            value = best if criterion.sense is Sense.MINIMIZE else len(lits) - best
            self.stats.layer_values.append(value)
            log.debug("criterion %s optimum %d", criterion, value)

        if self.canonical:
            self._canonicalize()
        return self._solution()

    def _cost(self, lits) -> int:
        m = self.model
        return sum(1 for lit in lits if m[abs(lit)] == (lit > 0))

    def _minimize(self, lits: list[int]) -> int:
        """Minimize the number of true *lits*; freeze and return the optimum."""
        hi = self._cost(lits)
        if hi == 0:
            self._add([[-lit] for lit in lits])
            return 0
        tot = Totalizer(lits, hi + 1, self.vm)
        self.stats.variables = self.vm.top
        self.stats.clauses += len(tot.clauses)
        self._add(tot.clauses)
        lo = 0
        while lo < hi:
            mid = (lo + hi) // 2
            if self._solve(tot.at_most(mid)):
                hi = self._cost(lits)
            else:
                lo = mid + 1
        self._add([[lit] for lit in tot.at_most(hi)])
        return hi

    def _canonicalize(self) -> None:
        """Pick the preferred optimum: per name in order, its highest feasible
        version installed and lower versions absent where possible.

        Each decision becomes a unit clause, so every probe is a solve call
        with a single assumption starting from decision level zero.
        """
        for name in self.u.names:
            chosen = False
            for version in reversed(self.u.versions(name)):
                x = self.vm.index[PackageId(name, version)]
                want = x if not chosen else -x
                if self.model[abs(want)] == (want > 0) or self._solve([want]):
                    self._add([[want]])
                    chosen = chosen or want > 0
                else:
                    self._add([[-want]])
                    chosen = chosen or want < 0


def solve_upgrade(u: Universe, r: Request, criteria: CriteriaList,
                  budget: Optional[Budget] = None):
    """Return a :class:`Solution`, ``NoSolution`` or :class:`Unknown`."""
    return LexOptimizer(u, r, criteria, budget).run()


__all__ = [
    "Budget",
    "LexOptimizer",
    "SolveStats",
    "Unknown",
    "objective_vector",
    "solve_upgrade",
]
