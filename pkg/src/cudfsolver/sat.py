"""A CDCL SAT solver with two watched literals, activity-based branching,
Luby restarts, learnt clause deletion and solving under assumptions.

Literals on the public interface are DIMACS-style nonzero ints. Internally a
literal for variable ``v`` is ``2*v`` (positive) or ``2*v + 1`` (negative),
so negation is ``lit ^ 1``.
"""

from __future__ import annotations

import enum
import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO


class ConflictAtLevelZero(Exception):
    """The clause database is unsatisfiable without any decision."""


class Status(enum.Enum):
    SAT = "SATISFIABLE"
    UNSAT = "UNSATISFIABLE"
    UNKNOWN = "UNKNOWN"


@dataclass
class SatResult:
    status: Status
    model: Optional[list[bool]] = None  # indexed by variable, slot 0 unused
    core: list[int] = field(default_factory=list)

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT

    def value(self, lit: int) -> bool:
        v = self.model[abs(lit)]
        return v if lit > 0 else not v


class _Clause:
    __slots__ = ("lits", "learnt", "activity", "removed")

    def __init__(self, lits: list[int], learnt: bool = False):
        self.lits = lits
        self.learnt = learnt
        self.activity = 0.0
        self.removed = False


def _luby(y: float, x: int) -> float:
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


class Solver:
    var_decay = 0.95
    clause_decay = 0.999
    restart_first = 100
    restart_inc = 2.0

    def __init__(self, nvars: int = 0, seed: int = 0, random_freq: float = 0.0):
        self.nvars = 0
        self.ok = True
        self.clauses: list[_Clause] = []
        self.learnts: list[_Clause] = []
        # per-literal
        self.val: list[int] = [0, 0]
        self.watches: list[list[_Clause]] = [[], []]
        # per-variable
        self.level: list[int] = [0]
        self.reason: list[Optional[_Clause]] = [None]
        self.activity: list[float] = [0.0]
        self.polarity: list[bool] = [False]
        self.seen: list[bool] = [False]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.max_learnts = 0.0
        self.rng = random.Random(seed)
        self.random_freq = random_freq
        self._assumed: list[int] = []
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.ensure_vars(nvars)

    # -- setup ---------------------------------------------------------------

    def ensure_vars(self, n: int) -> None:
        while self.nvars < n:
            self.nvars += 1
            v = self.nvars
            self.val += [0, 0]
            self.watches += [[], []]
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.polarity.append(False)
            self.seen.append(False)
            heapq.heappush(self.heap, (0.0, v))

    def new_var(self) -> int:
        self.ensure_vars(self.nvars + 1)
        return self.nvars

    def set_polarity(self, var: int, value: bool) -> None:
        """Preferred truth value when *var* is picked as a decision."""
        self.polarity[var] = value

    def add_clause(self, lits: Iterable[int]) -> None:
        if not self.ok:
            raise ConflictAtLevelZero()
        self._backtrack(0)
        internal = set()
        for x in lits:
            if x == 0:
                raise ValueError("literal 0 is not allowed")
            self.ensure_vars(abs(x))
            internal.add(2 * x if x > 0 else -2 * x + 1)
        val = self.val
        clause = []
        for lit in sorted(internal):
            if lit ^ 1 in internal or val[lit] == 1:
                return  # tautology or already satisfied
            if val[lit] == 0:
                clause.append(lit)
        if not clause:
            self.ok = False
            raise ConflictAtLevelZero()
        if len(clause) == 1:
            self._enqueue(clause[0], None)
            if self._propagate() is not None:
                self.ok = False
                raise ConflictAtLevelZero()
            return
        c = _Clause(clause)
        self.clauses.append(c)
        self.watches[clause[0]].append(c)
        self.watches[clause[1]].append(c)

    def add_clauses(self, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add_clause(c)

    # -- core machinery ------------------------------------------------------

    def _enqueue(self, lit: int, reason: Optional[_Clause]) -> None:
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        v = lit >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> Optional[_Clause]:
        val = self.val
        watches = self.watches
        trail = self.trail
        level = self.level
        reason = self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        conflict = None
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c.removed:
                    continue
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0] = lits[1]
                    lits[1] = false_lit
                first = lits[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if val[lk] != -1:
                        lits[1] = lk
                        lits[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == -1:
                        conflict = c
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                    else:
                        val[first] = 1
                        val[first ^ 1] = -1
                        v = first >> 1
                        level[v] = dl
                        reason[v] = c
                        trail.append(first)
            del ws[j:]
            if conflict is not None:
                qhead = len(trail)
                break
        self.propagations += qhead - self.qhead
        self.qhead = qhead
        return conflict

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        val = self.val
        polarity = self.polarity
        reason = self.reason
        activity = self.activity
        heap = self.heap
        start = self.trail_lim[lvl]
        for lit in self.trail[start:]:
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            polarity[v] = not (lit & 1)
            reason[v] = None
            heapq.heappush(heap, (-activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _bump_var(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for i in range(1, self.nvars + 1):
                act[i] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[i], i) for i in range(1, self.nvars + 1) if self.val[2 * i] == 0]
            heapq.heapify(self.heap)
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _bump_clause(self, c: _Clause) -> None:
        c.activity += self.cla_inc
        if c.activity > 1e20:
            for lc in self.learnts:
                lc.activity *= 1e-20
            self.cla_inc *= 1e-20

    def _analyze(self, confl: _Clause) -> tuple[list[int], int]:
        seen = self.seen
        level = self.level
        reason = self.reason
        trail = self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        to_clear = []
        path = 0
        p = -1
        idx = len(trail) - 1
        while True:
            if confl.learnt:
                self._bump_clause(confl)
            for q in confl.lits if p == -1 else confl.lits[1:]:
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    to_clear.append(v)
                    self._bump_var(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = False
            path -= 1
            if path <= 0:
                break
            # reason clauses keep their implied literal in slot 0
            if confl.lits[0] != p:
                i = confl.lits.index(p)
                confl.lits[0], confl.lits[i] = p, confl.lits[0]
        learnt[0] = p ^ 1

        # drop literals implied by the rest of the clause
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None:
                kept.append(q)
                continue
            for x in r.lits:
                vx = x >> 1
                if vx != q >> 1 and not seen[vx] and level[vx] > 0:
                    kept.append(q)
                    break
        learnt = kept
        for v in to_clear:
            seen[v] = False

        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for i in range(2, len(learnt)):
            if level[learnt[i] >> 1] > level[learnt[best] >> 1]:
                best = i
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _analyze_final(self, p: int) -> list[int]:
        """Assumptions responsible for *p* being false (p is an internal literal)."""
        core = [p]
        if not self.trail_lim:
            return core
        seen = self.seen
        seen[p >> 1] = True
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            lit = self.trail[i]
            v = lit >> 1
            if not seen[v]:
                continue
            r = self.reason[v]
            if r is None:
                if self.level[v] > 0:
                    core.append(lit ^ 1)
            else:
                for q in r.lits:
                    if self.level[q >> 1] > 0:
                        seen[q >> 1] = True
            seen[v] = False
        seen[p >> 1] = False
        return core

    def _pick_branch(self) -> int:
        val = self.val
        if self.random_freq and self.rng.random() < self.random_freq:
            free = [v for v in range(1, self.nvars + 1) if val[2 * v] == 0]
            if free:
                v = self.rng.choice(free)
                return 2 * v + (0 if self.polarity[v] else 1)
        heap = self.heap
        act = self.activity
        while heap:
            neg_act, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -neg_act == act[v]:
                return 2 * v + (0 if self.polarity[v] else 1)
        return -1

    def _reduce_db(self) -> None:
        learnts = sorted(self.learnts, key=lambda c: c.activity)
        reason = self.reason
        keep = []
        half = len(learnts) // 2
        for i, c in enumerate(learnts):
            locked = reason[c.lits[0] >> 1] is c and self.val[c.lits[0]] == 1
            if i < half and len(c.lits) > 2 and not locked:
                c.removed = True
            else:
                keep.append(c)
        self.learnts = keep

    def _compact_heap(self) -> None:
        if len(self.heap) > 4 * self.nvars + 64:
            act = self.activity
            val = self.val
            self.heap = [(-act[v], v) for v in range(1, self.nvars + 1) if val[2 * v] == 0]
            heapq.heapify(self.heap)

    # -- search --------------------------------------------------------------

    def _search(self, budget: int, assumptions: list[int]):
        """Run until SAT/UNSAT, *budget* conflicts, or a restart is due.

        Returns (status or None for restart, core or None).
        """
        conflicts_here = 0
        n_assume = len(assumptions)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    self.ok = False
                    return Status.UNSAT, []
                learnt, bt = self._analyze(confl)
                self._backtrack(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    c = _Clause(learnt, learnt=True)
                    self.learnts.append(c)
                    self.watches[learnt[0]].append(c)
                    self.watches[learnt[1]].append(c)
                    self._bump_clause(c)
                    self._enqueue(learnt[0], c)
                self.var_inc /= self.var_decay
                self.cla_inc /= self.clause_decay
                continue
            if conflicts_here >= budget:
                self._backtrack(min(n_assume, len(self.trail_lim)))
                return None, None
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
            next_lit = -1
            while len(self.trail_lim) < n_assume:
                p = assumptions[len(self.trail_lim)]
                if self.val[p] == 1:
                    self.trail_lim.append(len(self.trail))
                elif self.val[p] == -1:
                    return Status.UNSAT, self._analyze_final(p ^ 1)
                else:
                    next_lit = p
                    break
            if next_lit == -1:
                self._compact_heap()
                next_lit = self._pick_branch()
                if next_lit == -1:
                    return Status.SAT, None
                self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(next_lit, None)

    def solve(self, assumptions: Sequence[int] = (), conflict_budget: Optional[int] = None) -> SatResult:
        """Decide satisfiability under *assumptions* (DIMACS literals).

        Decision levels already holding a shared prefix of the previous call's
        assumptions are reused rather than rebuilt.
        """
        if not self.ok:
            return SatResult(Status.UNSAT)
        for a in assumptions:
            self.ensure_vars(abs(a))
        internal = [2 * a if a > 0 else -2 * a + 1 for a in assumptions]
        prefix = 0
        for old, new in zip(self._assumed, internal):
            if old != new:
                break
            prefix += 1
        self._backtrack(min(prefix, len(self.trail_lim)))
        self._assumed = internal
        if self.max_learnts == 0:
            self.max_learnts = max(len(self.clauses) / 3.0, 1000.0)
        start_conflicts = self.conflicts
        restarts = 0
        while True:
            if conflict_budget is not None:
                left = conflict_budget - (self.conflicts - start_conflicts)
                if left <= 0:
                    self._backtrack(0)
                    return SatResult(Status.UNKNOWN)
            else:
                left = None
            rest = int(_luby(self.restart_inc, restarts) * self.restart_first)
            status, core = self._search(rest if left is None else min(rest, left), internal)
            if status is Status.SAT:
                model = [False] * (self.nvars + 1)
                val = self.val
                for v in range(1, self.nvars + 1):
                    model[v] = val[2 * v] == 1
                return SatResult(Status.SAT, model=model)
            if status is Status.UNSAT:
                self._assumed = []
                self._backtrack(0)
                # analyze_final yields negated assumptions
                assumed = {(l >> 1) * (1 if l & 1 else -1) for l in core}
                return SatResult(Status.UNSAT, core=sorted(assumed, key=abs))
            restarts += 1
            self.max_learnts *= 1.05

    def stats(self) -> dict[str, int]:
        return {
            "vars": self.nvars,
            "clauses": len(self.clauses),
            "learnts": len(self.learnts),
            "conflicts": self.conflicts,
            "decisions": self.decisions,
            "propagations": self.propagations,
        }


def solve_cnf(clauses: Iterable[Iterable[int]], nvars: int = 0,
              assumptions: Sequence[int] = (), conflict_budget: Optional[int] = None,
              seed: int = 0) -> SatResult:
    s = Solver(nvars, seed=seed)
    try:
        s.add_clauses(clauses)
    except ConflictAtLevelZero:
        return SatResult(Status.UNSAT)
    return s.solve(assumptions, conflict_budget)


# -- DIMACS -------------------------------------------------------------------


class DimacsError(ValueError):
    pass


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    nvars = nclauses = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad header {line!r}")
            try:
                nvars, nclauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: bad header {line!r}") from None
            continue
        if nvars is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                x = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if abs(x) > nvars:
                raise DimacsError(f"line {lineno}: literal {x} exceeds {nvars} variables")
            if x == 0:
                clauses.append(current)
                current = []
            else:
                current.append(x)
    if current:
        clauses.append(current)
    if nvars is None:
        raise DimacsError("missing 'p cnf' header")
    if len(clauses) != nclauses:
        raise DimacsError(f"header declares {nclauses} clauses, found {len(clauses)}")
    return nvars, clauses


def write_dimacs(clauses: Sequence[Sequence[int]], nvars: int, out: TextIO) -> None:
    out.write(f"p cnf {nvars} {len(clauses)}\n")
    for c in clauses:
        out.write(" ".join(map(str, c)) + " 0\n")


def format_result(result: SatResult) -> str:
    lines = [f"s {result.status.value}"]
    if result.sat:
        lits = [v if result.model[v] else -v for v in range(1, len(result.model))]
        for i in range(0, len(lits), 10):
            lines.append("v " + " ".join(map(str, lits[i:i + 10])))
        lines.append("v 0")
    return "\n".join(lines) + "\n"
