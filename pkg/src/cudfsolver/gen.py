"""Seeded random universes and requests for differential testing and benchmarks.

All randomness comes from :class:`SplitMix64`, a fixed 64-bit generator, and
only integer arithmetic is used to turn its output into choices, so a given
(parameters, seed) pair produces the same corpus on every platform. The exact
drawing procedure is documented in the README.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import (
    Formula,
    KeepLevel,
    PackageId,
    PackageStanza,
    RelOp,
    Request,
    Universe,
    VpkgAtom,
    consistency_violations,
)

MASK64 = (1 << 64) - 1
# Probability scale: a probability p is compared as draw(10**6) < round(p * 10**6).
PPM = 1_000_000
UNSAT_BOUND_PPM = 50_000  # 0.05
_OPS = (RelOp.EQ, RelOp.NEQ, RelOp.GEQ, RelOp.GT, RelOp.LEQ, RelOp.LT)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n) by modulo reduction."""
        return self.next() % n

    def between(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)

    def chance(self, p: float) -> bool:
        return self.below(PPM) < round(p * PPM)

    def choice(self, seq: Sequence):
        return seq[self.below(len(seq))]


@dataclass(frozen=True)
class GenParams:
    n_packages: int = 12
    versions_per_name: tuple[int, int] = (1, 3)
    dep_density: float = 0.35
    conflict_density: float = 0.15
    installed_fraction: float = 0.4
    provides_density: float = 0.1
    recommends_density: float = 0.1
    keep_density: float = 0.1


def _rand_atom(rng: SplitMix64, name: str, versions: Sequence[int]) -> VpkgAtom:
    roll = rng.below(PPM)
    if roll < UNSAT_BOUND_PPM:
        return VpkgAtom(name, RelOp.GT, versions[-1])
    if roll < PPM // 2:
        return VpkgAtom(name)
    return VpkgAtom(name, rng.choice(_OPS), rng.choice(versions))


def gen_universe(n_packages: int = 12, versions_per_name: tuple[int, int] = (1, 3),
                 dep_density: float = 0.35, conflict_density: float = 0.15,
                 installed_fraction: float = 0.4, seed: int = 0,
                 params: Optional[GenParams] = None) -> Universe:
    """Generate *n_packages* package versions spread over several names.

    The initial installation is repaired to be consistent, so generated
    problems start from a sane system, as real ones usually do.
    """
    if params is None:
        params = GenParams(n_packages, tuple(versions_per_name), dep_density,
                           conflict_density, installed_fraction)
    for p in (params.dep_density, params.conflict_density, params.installed_fraction):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"densities must lie in [0, 1], got {p}")
    lo, hi = params.versions_per_name
    if params.n_packages < 0 or lo < 1 or hi < lo:
        raise ValueError("invalid package counts")
    rng = SplitMix64(seed)

    names: list[str] = []
    versions: dict[str, list[int]] = {}
    remaining = params.n_packages
    while remaining > 0:
        name = f"p{len(names)}"
        k = min(rng.between(lo, hi), remaining)
        names.append(name)
        versions[name] = list(range(1, k + 1))
        remaining -= k
    features = [f"v{i}" for i in range(max(1, len(names) // 4))]

    # provides first so that dependencies can mention features
    provides: dict[PackageId, tuple] = {}
    for name in names:
        for v in versions[name]:
            if rng.chance(params.provides_density):
                feat = rng.choice(features)
                fver = rng.between(1, 3) if rng.chance(0.5) else None
                provides[PackageId(name, v)] = ((feat, fver),)
    provided = sorted({f for entries in provides.values() for f, _ in entries})

    stanzas: list[PackageStanza] = []
    for name in names:
        others = [n for n in names if n != name]
        for v in versions[name]:
            pid = PackageId(name, v)
            conjuncts = []
            if others:
                for _ in range(3):
                    if not rng.chance(params.dep_density):
                        continue
                    width = rng.between(1, 2)
                    disj = []
                    for _ in range(width):
                        if provided and rng.chance(0.1):
                            disj.append(VpkgAtom(rng.choice(provided)))
                        else:
                            target = rng.choice(others)
                            disj.append(_rand_atom(rng, target, versions[target]))
                    conjuncts.append(tuple(dict.fromkeys(disj)))
            conflicts = []
            if others and rng.chance(params.conflict_density):
                target = rng.choice(others)
                conflicts.append(_rand_atom(rng, target, versions[target]))
            recommends = ()
            if others and rng.chance(params.recommends_density):
                target = rng.choice(others)
                recommends = ((VpkgAtom(target),),)
            installed = rng.chance(params.installed_fraction)
            keep = KeepLevel.NONE
            if installed and rng.chance(params.keep_density):
                keep = rng.choice((KeepLevel.VERSION, KeepLevel.PACKAGE, KeepLevel.FEATURE))
            stanzas.append(PackageStanza(
                name=name, version=v, depends=Formula(tuple(conjuncts)),
                conflicts=tuple(conflicts), provides=provides.get(pid, ()),
                recommends=Formula(recommends), installed=installed, keep=keep,
            ))
    return Universe(_repair(stanzas))


def _repair(stanzas: list[PackageStanza]) -> list[PackageStanza]:
    """Uninstall packages until the initial installation is consistent."""
    u = Universe(stanzas)
    installed = set(u.initial_installation())
    while True:
        bad = {v.package for v in consistency_violations(u, installed)}
        if not bad:
            break
        installed -= bad
    out = []
    for st in stanzas:
        if st.installed and st.id not in installed:
            st = PackageStanza(name=st.name, version=st.version, depends=st.depends,
                               conflicts=st.conflicts, provides=st.provides,
                               recommends=st.recommends)
        out.append(st)
    return out


def gen_request(u: Universe, kind: str = "mixed", seed: int = 0) -> Request:
    if kind not in ("install", "remove", "upgrade", "mixed"):
        raise ValueError(f"unknown request kind {kind!r}")
    if not len(u):
        return Request()
    rng = SplitMix64(seed ^ 0x5DEECE66D)
    names = u.names
    installed_names = sorted({n for n, _ in u.initial_installation()})
    buckets: dict[str, list[VpkgAtom]] = {"install": [], "remove": [], "upgrade": []}
    count = rng.between(1, 3) if kind == "mixed" else 1
    for _ in range(count):
        k = rng.choice(("install", "remove", "upgrade")) if kind == "mixed" else kind
        if k == "install":
            name = rng.choice(names)
            atom = _rand_atom(rng, name, u.versions(name)) if rng.chance(0.3) else VpkgAtom(name)
        else:
            pool = installed_names if installed_names and rng.chance(0.8) else names
            atom = VpkgAtom(rng.choice(pool))
        if atom not in buckets[k]:
            buckets[k].append(atom)
    return Request(tuple(buckets["install"]), tuple(buckets["remove"]), tuple(buckets["upgrade"]))
