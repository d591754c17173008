"""Package universes, requests and solutions, with CUDF provider semantics."""

from __future__ import annotations

import enum
import operator
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

NAME_RE = re.compile(r"^[a-zA-Z0-9][a-zA-Z0-9.+\-]*$")


class ModelError(Exception):
    pass


class DuplicatePackage(ModelError):
    def __init__(self, name: str, version: int):
        super().__init__(f"duplicate package {name} version {version}")
        self.name = name
        self.version = version


class UnknownPackage(ModelError):
    def __init__(self, name: str, version: int):
        super().__init__(f"unknown package {name} version {version}")
        self.name = name
        self.version = version


def check_name(name: str) -> str:
    if not NAME_RE.match(name):
        raise ValueError(f"invalid package name {name!r}")
    return name


def check_version(version: int) -> int:
    if isinstance(version, bool) or not isinstance(version, int) or version < 1:
        raise ValueError(f"version must be a positive integer, got {version!r}")
    return version


class PackageId(NamedTuple):
    name: str
    version: int

    def __str__(self) -> str:
        return f"{self.name}={self.version}"


class RelOp(enum.Enum):
    EQ = "="
    NEQ = "!="
    GEQ = ">="
    GT = ">"
    LEQ = "<="
    LT = "<"

    def holds(self, left: int, right: int) -> bool:
        return _OPS[self](left, right)


_OPS = {
    RelOp.EQ: operator.eq,
    RelOp.NEQ: operator.ne,
    RelOp.GEQ: operator.ge,
    RelOp.GT: operator.gt,
    RelOp.LEQ: operator.le,
    RelOp.LT: operator.lt,
}


@dataclass(frozen=True)
class VpkgAtom:
    """A package name with an optional version constraint, e.g. ``attr >= 2``."""

    name: str
    op: Optional[RelOp] = None
    version: Optional[int] = None

    def __post_init__(self):
        if (self.op is None) != (self.version is None):
            raise ValueError("operator and version must be given together")

    @property
    def constraint(self) -> Optional[tuple[RelOp, int]]:
        if self.op is None:
            return None
        return (self.op, self.version)

    def accepts(self, version: Optional[int]) -> bool:
        """True if a (possibly versionless) candidate satisfies the constraint."""
        if self.op is None:
            return True
        if version is None:
            return False
        return self.op.holds(version, self.version)

    def __str__(self) -> str:
        if self.op is None:
            return self.name
        return f"{self.name} {self.op.value} {self.version}"


@dataclass(frozen=True)
class Formula:
    """CNF over atoms: a conjunction of disjunctions.

    An empty conjunct list is TRUE. An empty disjunct can never be satisfied,
    so ``Formula(((),))`` is FALSE.
    """

    conjuncts: tuple[tuple[VpkgAtom, ...], ...] = ()

    @property
    def is_true(self) -> bool:
        return not self.conjuncts

    @property
    def is_false(self) -> bool:
        return any(not d for d in self.conjuncts)

    def atoms(self) -> Iterable[VpkgAtom]:
        for d in self.conjuncts:
            yield from d


TRUE = Formula(())
FALSE = Formula(((),))


class KeepLevel(enum.Enum):
    NONE = "none"
    VERSION = "version"
    PACKAGE = "package"
    FEATURE = "feature"


@dataclass(frozen=True)
class PackageStanza:
    name: str
    version: int
    depends: Formula = TRUE
    conflicts: tuple[VpkgAtom, ...] = ()
    provides: tuple[tuple[str, Optional[int]], ...] = ()
    recommends: Formula = TRUE
    installed: bool = False
    keep: KeepLevel = KeepLevel.NONE
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        check_name(self.name)
        check_version(self.version)
        seen = set()
        for feat, ver in self.provides:
            check_name(feat)
            if ver is not None:
                check_version(ver)
            if (feat, ver) in seen:
                raise ValueError(f"duplicate provides entry {feat} in {self.name}")
            seen.add((feat, ver))

    @property
    def id(self) -> PackageId:
        return PackageId(self.name, self.version)


@dataclass(frozen=True)
class Request:
    install: tuple[VpkgAtom, ...] = ()
    remove: tuple[VpkgAtom, ...] = ()
    upgrade: tuple[VpkgAtom, ...] = ()

    def is_empty(self) -> bool:
        return not (self.install or self.remove or self.upgrade)


@dataclass(frozen=True)
class Solution:
    installed: frozenset[PackageId]

    def __init__(self, installed: Iterable[PackageId] = ()):
        object.__setattr__(self, "installed", frozenset(installed))

    def __contains__(self, pid) -> bool:
        return pid in self.installed

    def __iter__(self):
        return iter(sorted(self.installed))

    def __len__(self) -> int:
        return len(self.installed)


class _NoSolution:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NoSolution"

    def __bool__(self) -> bool:
        return False


NoSolution = _NoSolution()


class Universe:
    """Immutable, indexed set of package stanzas."""

    def __init__(self, stanzas: Iterable[PackageStanza]):
        by_id: dict[PackageId, PackageStanza] = {}
        for st in stanzas:
            if st.id in by_id:
                raise DuplicatePackage(st.name, st.version)
            by_id[st.id] = st
        self._by_id = by_id
        self._ids = tuple(sorted(by_id))
        versions: dict[str, list[int]] = {}
        for name, version in self._ids:
            versions.setdefault(name, []).append(version)
        self.name_index: dict[str, tuple[int, ...]] = {
            n: tuple(vs) for n, vs in versions.items()
        }
        features: dict[str, set[tuple[PackageId, Optional[int]]]] = {}
        for pid in self._ids:
            for feat, ver in by_id[pid].provides:
                features.setdefault(feat, set()).add((pid, ver))
        self.feature_index: dict[str, frozenset[tuple[PackageId, Optional[int]]]] = {
            f: frozenset(s) for f, s in sorted(features.items())
        }
        self._provider_cache: dict[VpkgAtom, frozenset[PackageId]] = {}

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, pid) -> bool:
        return pid in self._by_id

    def __getitem__(self, pid: PackageId) -> PackageStanza:
        return self._by_id[pid]

    @property
    def ids(self) -> tuple[PackageId, ...]:
        """All package ids, sorted by (name, version)."""
        return self._ids

    @property
    def stanzas(self) -> list[PackageStanza]:
        return [self._by_id[p] for p in self._ids]

    @property
    def names(self) -> list[str]:
        return sorted(self.name_index)

    def versions(self, name: str) -> tuple[int, ...]:
        return self.name_index.get(name, ())

    def providers(self, atom: VpkgAtom) -> frozenset[PackageId]:
        cached = self._provider_cache.get(atom)
        if cached is not None:
            return cached
        found = {
            PackageId(atom.name, v)
            for v in self.name_index.get(atom.name, ())
            if atom.accepts(v)
        }
        for pid, ver in self.feature_index.get(atom.name, ()):
            if atom.accepts(ver):
                found.add(pid)
        result = frozenset(found)
        self._provider_cache[atom] = result
        return result

    def initial_installation(self) -> frozenset[PackageId]:
        return frozenset(p for p in self._ids if self._by_id[p].installed)


def build_universe(stanzas: Iterable[PackageStanza]) -> Universe:
    return Universe(stanzas)


def providers(u: Universe, atom: VpkgAtom) -> frozenset[PackageId]:
    return u.providers(atom)


def initial_installation(u: Universe) -> frozenset[PackageId]:
    return u.initial_installation()


@dataclass(frozen=True)
class UnsatDependency:
    package: PackageId
    disjunct: tuple[VpkgAtom, ...]

    def __str__(self) -> str:
        alts = " | ".join(str(a) for a in self.disjunct) or "false!"
        return f"unsatisfied dependency: {self.package} depends on {alts}"


@dataclass(frozen=True)
class ConflictViolation:
    package: PackageId
    other: PackageId
    atom: VpkgAtom

    def __str__(self) -> str:
        return f"conflict: {self.package} conflicts with {self.other} (via {self.atom})"


def installed_ids(u: Universe, s) -> frozenset[PackageId]:
    ids = s.installed if isinstance(s, Solution) else frozenset(s)
    for pid in ids:
        if pid not in u:
            raise UnknownPackage(pid[0], pid[1])
    return ids


def consistency_violations(u: Universe, s) -> list:
    """Every dependency and conflict failure of installation set *s*."""
    ids = installed_ids(u, s)
    out: list = []
    for pid in sorted(ids):
        st = u[pid]
        for disjunct in st.depends.conjuncts:
            if not any(u.providers(a) & ids for a in disjunct):
                out.append(UnsatDependency(pid, disjunct))
        for atom in st.conflicts:
            for other in sorted(u.providers(atom) & ids):
                if other != pid:
                    out.append(ConflictViolation(pid, other, atom))
    return out
