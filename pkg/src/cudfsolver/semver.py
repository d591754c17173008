"""Semantic-versioning front end: manifests and registries in, CUDF out.

Each distinct version of a name is mapped to its rank (1, 2, ...) in semver
order, range expressions are compiled to explicit disjunctions of ``name = rank``
atoms, and every stanza conflicts with its own name so that at most one
version of a package is selected. Solutions are mapped back to lockfiles.
"""

from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .criteria import CriteriaList, format_criteria
from .cudf import CudfDocument
from .model import (
    NAME_RE,
    Formula,
    PackageId,
    PackageStanza,
    RelOp,
    Request,
    Solution,
    VpkgAtom,
)


class TranslateError(Exception):
    pass


class MappingGap(Exception):
    def __init__(self, pid: PackageId):
        super().__init__(f"no semver version is mapped to {pid}")
        self.pid = pid


# -- versions -------------------------------------------------------------------

_VERSION_RE = re.compile(r"^v?(\d+)\.(\d+)\.(\d+)(?:[-.]([0-9A-Za-z][0-9A-Za-z.\-]*))?$")


@functools.total_ordering
@dataclass(frozen=True)
class SemverVersion:
    major: int
    minor: int
    patch: int
    qualifier: Optional[str] = None

    @classmethod
    def parse(cls, text: str) -> "SemverVersion":
        m = _VERSION_RE.match(text.strip())
        if not m:
            raise ValueError(f"invalid version {text!r}")
        major, minor, patch, qual = m.groups()
        return cls(int(major), int(minor), int(patch), qual)

    def _key(self):
        # a qualified (pre-release) version sorts before the plain release
        return (self.major, self.minor, self.patch, self.qualifier is None, self.qualifier or "")

    def __lt__(self, other: "SemverVersion") -> bool:
        return self._key() < other._key()

    def __str__(self) -> str:
        base = f"{self.major}.{self.minor}.{self.patch}"
        return f"{base}-{self.qualifier}" if self.qualifier else base


# -- ranges ---------------------------------------------------------------------

_PRIM_RE = re.compile(
    r"\s*(>=|<=|!=|==|>|<|=|\^|~)?\s*"
    r"(\*|[xX]|\d+(?:\.(?:\d+|\*|[xX])){0,2}(?:-[0-9A-Za-z.\-]+)?)\s*"
)


@dataclass(frozen=True)
class Partial:
    """A possibly incomplete version: ``4.3.*`` has ``parts == (4, 3)``."""

    parts: tuple[int, ...]
    qualifier: Optional[str] = None

    @classmethod
    def parse(cls, text: str) -> "Partial":
        text, _, qual = text.partition("-")
        parts: list[int] = []
        for piece in text.split("."):
            if piece in ("*", "x", "X"):
                break
            parts.append(int(piece))
        return cls(tuple(parts), qual or None)

    @property
    def complete(self) -> bool:
        return len(self.parts) == 3

    def lower(self) -> SemverVersion:
        p = list(self.parts) + [0] * (3 - len(self.parts))
        return SemverVersion(p[0], p[1], p[2], self.qualifier if self.complete else None)

    def bump(self, index: int) -> SemverVersion:
        p = list(self.parts) + [0] * (3 - len(self.parts))
        p[index] += 1
        for i in range(index + 1, 3):
            p[i] = 0
        return SemverVersion(*p)

    def upper(self) -> Optional[SemverVersion]:
        """Exclusive upper bound of the versions this partial covers."""
        if not self.parts:
            return None
        return self.bump(len(self.parts) - 1)


@dataclass(frozen=True)
class Primitive:
    op: str  # one of = != >= > <= < ^ ~
    version: Partial
    text: str = field(default="", compare=False)

    def matches(self, v: SemverVersion) -> bool:
        op, part = self.op, self.version
        if op in ("=", "!="):
            if part.complete:
                hit = v == part.lower()
            elif not part.parts:
                hit = True
            else:
                upper = part.upper()
                hit = v >= part.lower() and (upper is None or v < upper)
            return hit if op == "=" else not hit
        if op == ">=":
            return v >= part.lower()
        if op == ">":
            if part.complete:
                return v > part.lower()
            upper = part.upper()
            return upper is not None and v >= upper
        if op == "<=":
            if part.complete:
                return v <= part.lower()
            upper = part.upper()
            return upper is None or v < upper
        if op == "<":
            return v < part.lower()
        if op == "^":
            lo = part.lower()
            nonzero = [i for i, x in enumerate(part.parts) if x != 0]
            if nonzero:
                hi = part.bump(nonzero[0])
            elif part.parts:
                hi = part.bump(len(part.parts) - 1)
            else:
                return True
            return lo <= v < hi
        if op == "~":
            lo = part.lower()
            if not part.parts:
                return True
            hi = part.bump(0 if len(part.parts) == 1 else 1)
            return lo <= v < hi
        raise ValueError(op)

    def __str__(self) -> str:
        return self.text or f"{self.op}{self.version}"


@dataclass(frozen=True)
class RangeExpr:
    """OR of ANDs of primitive constraints."""

    alternatives: tuple[tuple[Primitive, ...], ...]
    text: str = field(default="", compare=False)

    def matches(self, v: SemverVersion) -> bool:
        return any(all(p.matches(v) for p in alt) for alt in self.alternatives)

    def __str__(self) -> str:
        return self.text


def parse_range(text: str) -> RangeExpr:
    """Parse ``>= 4.3.*``, ``^18.2.0``, ``~1.2``, ``>=1, <2 || 3.x`` and friends."""
    alts = []
    for alt in text.split("||"):
        alt = alt.replace(",", " ").strip()
        if not alt:
            alts.append((Primitive("=", Partial(())),))
            continue
        prims = []
        pos = 0
        while pos < len(alt):
            m = _PRIM_RE.match(alt, pos)
            if not m or m.end() == pos:
                raise ValueError(f"invalid range {text!r} near {alt[pos:]!r}")
            op = m.group(1) or "="
            if op == "==":
                op = "="
            prims.append(Primitive(op, Partial.parse(m.group(2)), m.group(0).strip()))
            pos = m.end()
        alts.append(tuple(prims))
    return RangeExpr(tuple(alts), text.strip())


def range_matches(r: Union[RangeExpr, str], v: Union[SemverVersion, str]) -> bool:
    if isinstance(r, str):
        r = parse_range(r)
    if isinstance(v, str):
        v = SemverVersion.parse(v)
    return r.matches(v)


# -- manifests, registries, lockfiles -------------------------------------------


@dataclass(frozen=True)
class Manifest:
    name: str
    version: SemverVersion
    dependencies: Mapping[str, RangeExpr] = field(default_factory=dict)
    qualified_dependencies: Mapping[str, Mapping[str, RangeExpr]] = field(default_factory=dict)
    conflicts: Mapping[str, RangeExpr] = field(default_factory=dict)

    def __post_init__(self):
        deps = set(self.dependencies)
        for group in self.qualified_dependencies.values():
            deps |= set(group)
        if self.name in deps:
            raise TranslateError(f"{self.name} depends on itself")

    @property
    def identity(self) -> str:
        return f"{self.name}@{self.version}"

    @classmethod
    def from_dict(cls, data: Mapping, name: Optional[str] = None,
                  version: Optional[str] = None) -> "Manifest":
        def ranges(d):
            return {k: parse_range(v) for k, v in sorted((d or {}).items())}

        return cls(
            name=name or data["name"],
            version=SemverVersion.parse(version or data["version"]),
            dependencies=ranges(data.get("dependencies")),
            qualified_dependencies={
                tag: ranges(group)
                for tag, group in sorted((data.get("qualified_dependencies") or {}).items())
            },
            conflicts=ranges(data.get("conflicts")),
        )

    def to_dict(self) -> dict:
        def ranges(d):
            return {k: str(v) for k, v in d.items()}

        out: dict = {"name": self.name, "version": str(self.version)}
        if self.dependencies:
            out["dependencies"] = ranges(self.dependencies)
        if self.qualified_dependencies:
            out["qualified_dependencies"] = {
                t: ranges(g) for t, g in self.qualified_dependencies.items()
            }
        if self.conflicts:
            out["conflicts"] = ranges(self.conflicts)
        return out


Registry = dict[str, list[tuple[SemverVersion, Manifest]]]


def _no_duplicate_keys(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise TranslateError(f"duplicate key {k!r}")
        out[k] = v
    return out


def registry_from_entries(entries: Iterable[Mapping]) -> Registry:
    """Build a registry from ``{"name": ..., "versions": {ver: manifest}}`` entries."""
    reg: Registry = {}
    for entry in entries:
        name = entry["name"]
        bucket = reg.setdefault(name, [])
        for ver_text, body in (entry.get("versions") or {}).items():
            m = Manifest.from_dict(body or {}, name=name, version=ver_text)
            if any(v == m.version for v, _ in bucket):
                raise TranslateError(f"duplicate registry version {name} {m.version}")
            bucket.append((m.version, m))
    for bucket in reg.values():
        bucket.sort(key=lambda e: e[0])
    return dict(sorted(reg.items()))


def load_registry(directory: Union[str, Path]) -> Registry:
    files = sorted(Path(directory).rglob("*.json"))
    entries = [json.loads(f.read_text(), object_pairs_hook=_no_duplicate_keys) for f in files]
    return registry_from_entries(entries)


def load_manifest(path: Union[str, Path]) -> Manifest:
    return Manifest.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Lockfile:
    resolved: Mapping[str, SemverVersion]
    manifest: str = ""
    criteria: str = ""

    def to_dict(self) -> dict:
        return {
            "generated_from": {"manifest": self.manifest, "criteria": self.criteria},
            "resolved": {n: str(v) for n, v in sorted(self.resolved.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "Lockfile":
        origin = data.get("generated_from") or {}
        return cls(
            resolved={n: SemverVersion.parse(v) for n, v in sorted(data.get("resolved", {}).items())},
            manifest=origin.get("manifest", ""),
            criteria=origin.get("criteria", ""),
        )


def load_lockfile(path: Union[str, Path]) -> Lockfile:
    return Lockfile.from_dict(json.loads(Path(path).read_text()))


# -- translation ------------------------------------------------------------------


def cudf_name(name: str) -> str:
    """Injective escape of an arbitrary package name into the CUDF name alphabet."""
    out = []
    for ch in name:
        if ch.isascii() and (ch.isalnum() or ch in ".-"):
            out.append(ch)
        else:
            out.extend(f"+{b:02x}" for b in ch.encode("utf-8"))
    escaped = "".join(out)
    if not escaped or not escaped[0].isalnum():
        escaped = "0+" + escaped
    assert NAME_RE.match(escaped)
    return escaped


@dataclass
class VersionMapping:
    root: PackageId
    names: dict[str, str]  # semver name -> cudf name
    ranks: dict[str, list[SemverVersion]]  # semver name -> versions in rank order

    def __post_init__(self):
        self._reverse = {c: n for n, c in self.names.items()}

    def rank(self, name: str, version: SemverVersion) -> int:
        return self.ranks[name].index(version) + 1

    def package_id(self, name: str, version: SemverVersion) -> PackageId:
        return PackageId(self.names[name], self.rank(name, version))

    def lookup(self, pid: PackageId) -> tuple[str, SemverVersion]:
        name = self._reverse.get(pid.name)
        if name is None or not 1 <= pid.version <= len(self.ranks.get(name, ())):
            raise MappingGap(pid)
        return name, self.ranks[name][pid.version - 1]


def compile_range(name: str, r: RangeExpr, vm: VersionMapping) -> tuple[VpkgAtom, ...]:
    """Disjunction of exact rank atoms equivalent to *r* over the registry."""
    cname = vm.names[name]
    versions = vm.ranks.get(name, [])
    if not versions:
        return (VpkgAtom(cname),)
    hits = [i for i, v in enumerate(versions, start=1) if r.matches(v)]
    if not hits:
        # no provider can satisfy this atom
        return (VpkgAtom(cname, RelOp.GT, len(versions)),)
    return tuple(VpkgAtom(cname, RelOp.EQ, i) for i in hits)


def translate(m: Manifest, reg: Registry, installed: Optional[Lockfile] = None,
              active_qualifiers: Iterable[str] = (), req_kind: str = "install"
              ) -> tuple[CudfDocument, VersionMapping]:
    if req_kind not in ("install", "upgrade"):
        raise TranslateError(f"unknown request kind {req_kind!r}")
    active = set(active_qualifiers)
    root_deps = dict(m.dependencies)
    for tag, group in sorted(m.qualified_dependencies.items()):
        if tag in active:
            for dep, r in group.items():
                if dep in root_deps:
                    # both constraints must hold: keep them as separate conjuncts
                    root_deps[dep] = RangeExpr(
                        tuple(a + b for a in root_deps[dep].alternatives for b in r.alternatives),
                        f"{root_deps[dep]} {r}",
                    )
                else:
                    root_deps[dep] = r

    mentioned = set(reg) | set(root_deps) | set(m.conflicts)
    for entries in reg.values():
        for _, man in entries:
            mentioned |= set(man.dependencies) | set(man.conflicts)
    ranks: dict[str, list[SemverVersion]] = {}
    for name, entries in reg.items():
        versions = [v for v, _ in entries]
        if len(set(versions)) != len(versions):
            raise TranslateError(f"duplicate registry versions for {name}")
        ranks[name] = sorted(versions)
    names = {n: cudf_name(n) for n in sorted(mentioned)}
    root_name = cudf_name(m.name) + "+root"
    vm = VersionMapping(PackageId(root_name, 1), names, ranks)

    locked = dict(installed.resolved) if installed else {}
    stanzas = []
    for name, entries in reg.items():
        for version, man in entries:
            depends = tuple(compile_range(d, r, vm) for d, r in sorted(man.dependencies.items()))
            conflicts = [VpkgAtom(names[name])]
            for d, r in sorted(man.conflicts.items()):
                atoms = compile_range(d, r, vm)
                conflicts.extend(a for a in atoms if a.op is RelOp.EQ)
            stanzas.append(PackageStanza(
                name=names[name],
                version=vm.rank(name, version),
                depends=Formula(depends),
                conflicts=tuple(dict.fromkeys(conflicts)),
                installed=locked.get(name) == version,
            ))
    root_conflicts = []
    for d, r in sorted(m.conflicts.items()):
        root_conflicts.extend(a for a in compile_range(d, r, vm) if a.op is RelOp.EQ)
    stanzas.append(PackageStanza(
        name=root_name,
        version=1,
        depends=Formula(tuple(compile_range(d, r, vm) for d, r in sorted(root_deps.items()))),
        conflicts=tuple(root_conflicts),
        installed=installed is not None,
    ))
    root_atom = VpkgAtom(root_name)
    if req_kind == "install":
        request = Request(install=(root_atom,))
    else:
        request = Request(upgrade=(root_atom,))
    doc = CudfDocument(packages=stanzas, request=request, request_label=m.identity)
    return doc, vm


def lift_solution(s: Solution, vm: VersionMapping, m: Manifest,
                  criteria: Union[CriteriaList, str]) -> Lockfile:
    resolved: dict[str, SemverVersion] = {}
    for pid in sorted(s.installed):
        if pid == vm.root:
            continue
        name, version = vm.lookup(pid)
        resolved[name] = version
    crit = criteria if isinstance(criteria, str) else format_criteria(criteria)
    return Lockfile(dict(sorted(resolved.items())), m.identity, crit)
