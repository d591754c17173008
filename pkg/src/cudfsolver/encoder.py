"""CNF encoding of universes, requests, keep constraints and objective layers.

Each package id gets one boolean variable. Objective layers are lists of
weighted literals whose truth is made equivalent to the measured condition by
defining clauses over auxiliary variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence, TextIO

from .criteria import Criterion, Measure, Sense
from .model import KeepLevel, PackageId, RelOp, Request, Universe, VpkgAtom
from .sat import write_dimacs

Clause = list[int]

# At-most-one switches from pairwise to sequential counter at this arity.
PAIRWISE_LIMIT = 8


class VarMap:
    """Dense bijection between package ids and variables 1..n; aux vars above n."""

    def __init__(self, u: Universe):
        self.ids: tuple[PackageId, ...] = u.ids
        self.index: dict[PackageId, int] = {pid: i for i, pid in enumerate(self.ids, start=1)}
        self.n_packages = len(self.ids)
        self.top = self.n_packages

    def var(self, pid: PackageId) -> int:
        return self.index[pid]

    def pid(self, var: int) -> PackageId:
        return self.ids[var - 1]

    def new_aux(self) -> int:
        self.top += 1
        return self.top

    def is_package(self, var: int) -> bool:
        return 1 <= var <= self.n_packages

    def solution_ids(self, model: Sequence[bool]) -> frozenset[PackageId]:
        return frozenset(pid for i, pid in enumerate(self.ids, start=1) if model[i])


def clause(lits: Iterable[int]) -> Optional[Clause]:
    """Normalize a clause: drop duplicate literals; None for a tautology."""
    out: list[int] = []
    seen: set[int] = set()
    for lit in lits:
        if -lit in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return out


class ClauseSet(list):
    """A list of clauses that silently drops tautologies on insertion."""

    def add(self, lits: Iterable[int]) -> None:
        c = clause(lits)
        if c is not None:
            self.append(c)


def _provider_vars(u: Universe, vm: VarMap, atoms: Iterable[VpkgAtom]) -> list[int]:
    found: set[int] = set()
    for a in atoms:
        for pid in u.providers(a):
            found.add(vm.index[pid])
    return sorted(found)


def encode_universe(u: Universe, vm: VarMap) -> ClauseSet:
    out = ClauseSet()
    conflict_pairs: set[tuple[int, int]] = set()
    for pid in u.ids:
        st = u[pid]
        x = vm.index[pid]
        for disjunct in st.depends.conjuncts:
            out.add([-x] + _provider_vars(u, vm, disjunct))
        for atom in st.conflicts:
            for other in sorted(u.providers(atom)):
                if other == pid:
                    continue
                y = vm.index[other]
                pair = (min(x, y), max(x, y))
                if pair not in conflict_pairs:
                    conflict_pairs.add(pair)
                    out.add([-pair[0], -pair[1]])
    return out


def at_most_one(lits: Sequence[int], vm: VarMap) -> ClauseSet:
    out = ClauseSet()
    if len(lits) < PAIRWISE_LIMIT:
        for a, b in combinations(lits, 2):
            out.add([-a, -b])
        return out
    # sequential counter: s_i is true once some lit among lits[:i+1] is true
    prev = None
    for i, lit in enumerate(lits):
        if i == len(lits) - 1:
            out.add([-lit, -prev])
            break
        s = vm.new_aux()
        out.add([-lit, s])
        if prev is not None:
            out.add([-prev, s])
            out.add([-lit, -prev])
        prev = s
    return out


def encode_request(u: Universe, vm: VarMap, r: Request) -> ClauseSet:
    out = ClauseSet()
    initial = u.initial_installation()
    for atom in r.install:
        # an empty provider set gives the empty clause
        out.append(_provider_vars(u, vm, [atom]))
    for atom in r.remove:
        for x in _provider_vars(u, vm, [atom]):
            out.add([-x])
    for atom in r.upgrade:
        name = atom.name
        current = [v for n, v in initial if n == name]
        floor = max(current) if current else None
        own = [vm.index[PackageId(name, v)] for v in u.versions(name) if atom.accepts(v)]
        out.append(sorted(own))
        if floor is not None:
            for v in u.versions(name):
                if v < floor:
                    out.add([-vm.index[PackageId(name, v)]])
        out.extend(at_most_one([vm.index[PackageId(name, v)] for v in u.versions(name)], vm))
    return out


def encode_keep(u: Universe, vm: VarMap) -> ClauseSet:
    out = ClauseSet()
    for pid in sorted(u.initial_installation()):
        st = u[pid]
        if st.keep is KeepLevel.VERSION:
            out.add([vm.index[pid]])
        elif st.keep is KeepLevel.PACKAGE:
            out.add(vm.index[PackageId(pid.name, v)] for v in u.versions(pid.name))
        elif st.keep is KeepLevel.FEATURE:
            for feat, ver in st.provides:
                atom = VpkgAtom(feat) if ver is None else VpkgAtom(feat, RelOp.EQ, ver)
                out.append(_provider_vars(u, vm, [atom]))
    return out


# -- objectives ---------------------------------------------------------------


@dataclass
class ObjectiveLayer:
    criterion: Criterion
    terms: list[tuple[int, int]] = field(default_factory=list)  # (weight, literal)
    defining_clauses: ClauseSet = field(default_factory=ClauseSet)

    @property
    def sense(self) -> Sense:
        return self.criterion.sense

    def value(self, model: Sequence[bool]) -> int:
        return sum(w for w, lit in self.terms if model[abs(lit)] == (lit > 0))


def _define_or(lits: list[int], vm: VarMap, out: ClauseSet) -> int:
    """Return a literal equivalent to OR(lits), adding an aux var if needed."""
    if len(lits) == 1:
        return lits[0]
    y = vm.new_aux()
    out.add([-y] + lits)
    for lit in lits:
        out.add([y, -lit])
    return y


def build_objective(u: Universe, vm: VarMap, criterion: Criterion) -> ObjectiveLayer:
    layer = ObjectiveLayer(criterion)
    defs = layer.defining_clauses
    measure = criterion.measure
    if measure is Measure.UNSAT_RECOMMENDS:
        for pid in u.ids:
            x = vm.index[pid]
            for disjunct in u[pid].recommends.conjuncts:
                provs = _provider_vars(u, vm, disjunct)
                if x in provs:
                    continue  # a package satisfies its own recommendation
                if not provs:
                    layer.terms.append((1, x))
                    continue
                # aux <-> x and none of provs
                y = vm.new_aux()
                defs.add([-y, x])
                for q in provs:
                    defs.add([-y, -q])
                defs.add([y, -x] + provs)
                layer.terms.append((1, y))
        return layer

    initial = u.initial_installation()
    for name in u.names:
        xs = [vm.index[PackageId(name, v)] for v in u.versions(name)]
        was = [PackageId(name, v) in initial for v in u.versions(name)]
        if measure is Measure.REMOVED:
            if any(was):
                layer.terms.append((1, -_define_or(xs, vm, defs)))
        elif measure is Measure.NEW:
            if not any(was):
                layer.terms.append((1, _define_or(xs, vm, defs)))
        elif measure is Measure.CHANGED:
            diffs = [-x if w else x for x, w in zip(xs, was)]
            layer.terms.append((1, _define_or(diffs, vm, defs)))
        elif measure is Measure.NOTUPTODATE:
            if len(xs) < 2:
                continue
            top, lower = xs[-1], xs[:-1]
            # y <-> (some lower version) and not top
            y = vm.new_aux()
            defs.add([-y, -top])
            defs.add([-y] + lower)
            for x in lower:
                defs.add([y, -x, top])
            layer.terms.append((1, y))
    return layer


# -- pseudo-Boolean bounds ------------------------------------------------------


class Totalizer:
    """Unary counter over unit-weight literals, saturated at *cap*.

    ``outputs[k-1]`` is forced true whenever at least ``k`` inputs are true,
    so asserting ``-outputs[k-1]`` bounds the count by ``k - 1``.
    """

    def __init__(self, lits: Sequence[int], cap: int, vm: VarMap):
        self.cap = cap
        self.clauses = ClauseSet()
        self.outputs = self._build(list(lits), vm) if lits and cap > 0 else []

    def _build(self, lits: list[int], vm: VarMap) -> list[int]:
        if len(lits) == 1:
            return lits
        mid = len(lits) // 2
        left = self._build(lits[:mid], vm)
        right = self._build(lits[mid:], vm)
        width = min(len(left) + len(right), self.cap)
        out = [vm.new_aux() for _ in range(width)]
        for i in range(len(left) + 1):
            for j in range(len(right) + 1):
                k = min(i + j, width)
                if k == 0:
                    continue
                c = [out[k - 1]]
                if i:
                    c.append(-left[i - 1])
                if j:
                    c.append(-right[j - 1])
                self.clauses.add(c)
        return out

    def at_most(self, bound: int) -> list[int]:
        """Assumption literals enforcing count <= bound (empty if vacuous)."""
        if bound >= len(self.outputs):
            return []
        return [-self.outputs[bound]]


def expand_weights(terms: Iterable[tuple[int, int]]) -> list[int]:
    lits: list[int] = []
    for w, lit in terms:
        if w < 1:
            raise ValueError(f"weights must be positive, got {w}")
        lits.extend([lit] * w)
    return lits


def cardinality_leq(terms: Sequence[tuple[int, int]], bound: int, vm: VarMap) -> ClauseSet:
    """Clauses admitting exactly the assignments whose weighted sum is <= bound."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if bound >= sum(w for w, _ in terms):
        return ClauseSet()
    if bound == 0:
        out = ClauseSet()
        for _, lit in terms:
            out.add([-lit])
        return out
    tot = Totalizer(expand_weights(terms), bound + 1, vm)
    out = tot.clauses
    for lit in tot.at_most(bound):
        out.add([lit])
    return out


def dump_dimacs(clauses: Sequence[Sequence[int]], nvars: int, out: TextIO) -> None:
    write_dimacs(clauses, nvars, out)

