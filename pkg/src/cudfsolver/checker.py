"""Independent validation of solutions against a universe and a request.

Works directly on sets of package ids; shares nothing with the encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    KeepLevel,
    PackageId,
    RelOp,
    Request,
    Universe,
    VpkgAtom,
    installed_ids,
    consistency_violations,
)


@dataclass(frozen=True)
class InstallViolation:
    atom: VpkgAtom

    def __str__(self) -> str:
        return f"install request not satisfied: {self.atom}"


@dataclass(frozen=True)
class RemoveViolation:
    atom: VpkgAtom
    present: tuple[PackageId, ...]

    def __str__(self) -> str:
        ids = ", ".join(map(str, self.present))
        return f"remove request not satisfied: {self.atom} still provided by {ids}"


@dataclass(frozen=True)
class UpgradeViolation:
    atom: VpkgAtom
    reason: str

    def __str__(self) -> str:
        return f"upgrade request not satisfied: {self.atom}: {self.reason}"


@dataclass(frozen=True)
class KeepViolation:
    package: PackageId
    level: KeepLevel

    def __str__(self) -> str:
        return f"keep {self.level.value} violated for {self.package}"


@dataclass
class CheckReport:
    consistency: list = field(default_factory=list)
    request: list = field(default_factory=list)
    keep: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.consistency or self.request or self.keep)

    @property
    def verdict(self) -> str:
        return "VALID" if self.valid else "INVALID"

    def violations(self) -> list:
        return [*self.consistency, *self.request, *self.keep]

    def lines(self) -> list[str]:
        return [str(v) for v in self.violations()]


def request_violations(u: Universe, r: Request, ids: frozenset[PackageId]) -> list:
    out: list = []
    for atom in r.install:
        if not u.providers(atom) & ids:
            out.append(InstallViolation(atom))
    for atom in r.remove:
        present = u.providers(atom) & ids
        if present:
            out.append(RemoveViolation(atom, tuple(sorted(present))))
    initial = u.initial_installation()
    for atom in r.upgrade:
        chosen = sorted(v for n, v in ids if n == atom.name)
        before = [v for n, v in initial if n == atom.name]
        if len(chosen) != 1:
            out.append(UpgradeViolation(atom, f"{len(chosen)} versions installed, expected exactly 1"))
            continue
        if not atom.accepts(chosen[0]):
            out.append(UpgradeViolation(atom, f"installed version {chosen[0]} does not match"))
        if before and chosen[0] < max(before):
            out.append(UpgradeViolation(atom, f"version {chosen[0]} is older than installed {max(before)}"))
    return out


def keep_violations(u: Universe, ids: frozenset[PackageId]) -> list:
    out: list = []
    names = {n for n, _ in ids}
    for pid in sorted(u.initial_installation()):
        st = u[pid]
        if st.keep is KeepLevel.VERSION:
            ok = pid in ids
        elif st.keep is KeepLevel.PACKAGE:
            ok = pid.name in names
        elif st.keep is KeepLevel.FEATURE:
            ok = all(
                u.providers(VpkgAtom(f) if v is None else VpkgAtom(f, RelOp.EQ, v)) & ids
                for f, v in st.provides
            )
        else:
            continue
        if not ok:
            out.append(KeepViolation(pid, st.keep))
    return out


def check(u: Universe, r: Request, s) -> CheckReport:
    ids = installed_ids(u, s)
    return CheckReport(
        consistency=consistency_violations(u, ids),
        request=request_violations(u, r or Request(), ids),
        keep=keep_violations(u, ids),
    )


def is_valid(u: Universe, r: Request, s) -> bool:
    return check(u, r, s).valid
