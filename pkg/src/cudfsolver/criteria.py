"""Optimization criteria: parsing, measure evaluation and lexicographic comparison."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .model import PackageId, Solution, Universe


class Measure(enum.Enum):
    REMOVED = "removed"
    NEW = "new"
    CHANGED = "changed"
    NOTUPTODATE = "notuptodate"
    UNSAT_RECOMMENDS = "unsat_recommends"


class Sense(enum.Enum):
    MINIMIZE = "-"
    MAXIMIZE = "+"


@dataclass(frozen=True)
class Criterion:
    sense: Sense
    measure: Measure

    def __str__(self) -> str:
        return f"{self.sense.value}{self.measure.value}"


CriteriaList = tuple[Criterion, ...]

SHORTCUTS = {
    "paranoid": "-removed,-changed",
    "trendy": "-removed,-notuptodate,-unsat_recommends,-new",
}


class CriteriaParseError(ValueError):
    def __init__(self, position: int, token: str, reason: str = ""):
        msg = f"bad criterion {token!r} at position {position}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.position = position
        self.token = token


def parse_criteria(text: str) -> CriteriaList:
    """Parse ``-changed,-removed``-style strings and the named shortcuts."""
    stripped = text.strip()
    if stripped in SHORTCUTS:
        return parse_criteria(SHORTCUTS[stripped])
    out = []
    pos = 0
    for token in text.split(","):
        item = token.strip()
        if not item:
            raise CriteriaParseError(pos, token, "empty criterion")
        sign, name = item[0], item[1:].strip()
        if sign not in "+-":
            raise CriteriaParseError(pos, item, "missing + or - sign")
        try:
            measure = Measure(name)
        except ValueError:
            raise CriteriaParseError(pos, item, "unknown measure") from None
        out.append(Criterion(Sense(sign), measure))
        pos += len(token) + 1
    return tuple(out)


def format_criteria(criteria: Iterable[Criterion]) -> str:
    return ",".join(str(c) for c in criteria)


def _by_name(ids: Iterable[PackageId]) -> dict[str, set[int]]:
    out: dict[str, set[int]] = {}
    for name, version in ids:
        out.setdefault(name, set()).add(version)
    return out


def _ids(s) -> frozenset[PackageId]:
    return s.installed if isinstance(s, Solution) else frozenset(s)


def evaluate(measure: Measure, u: Universe, s) -> int:
    ids = _ids(s)
    if measure is Measure.UNSAT_RECOMMENDS:
        total = 0
        for pid in ids:
            for disjunct in u[pid].recommends.conjuncts:
                if not any(u.providers(a) & ids for a in disjunct):
                    total += 1
        return total
    before = _by_name(u.initial_installation())
    after = _by_name(ids)
    if measure is Measure.REMOVED:
        return sum(1 for n in before if n not in after)
    if measure is Measure.NEW:
        return sum(1 for n in after if n not in before)
    if measure is Measure.CHANGED:
        return sum(1 for n in before.keys() | after.keys() if before.get(n) != after.get(n))
    if measure is Measure.NOTUPTODATE:
        return sum(1 for n, vs in after.items() if max(vs) < u.versions(n)[-1])
    raise ValueError(measure)


def objective_vector(u: Universe, criteria: CriteriaList, s) -> tuple[int, ...]:
    return tuple(evaluate(c.measure, u, s) for c in criteria)


def sort_key(criteria: CriteriaList, vector: tuple[int, ...]) -> tuple[int, ...]:
    """Map an objective vector to a tuple where smaller is better."""
    return tuple(v if c.sense is Sense.MINIMIZE else -v for c, v in zip(criteria, vector))


def compare(criteria: CriteriaList, u: Universe, s1, s2) -> int:
    """Return -1 if *s1* is better, 1 if *s2* is better, 0 if they tie."""
    k1 = sort_key(criteria, objective_vector(u, criteria, s1))
    k2 = sort_key(criteria, objective_vector(u, criteria, s2))
    return (k1 > k2) - (k1 < k2)
