import pytest

from cudfsolver.model import (
    ConflictViolation,
    DuplicatePackage,
    Formula,
    NoSolution,
    PackageId,
    PackageStanza,
    RelOp,
    Solution,
    UnknownPackage,
    UnsatDependency,
    Universe,
    VpkgAtom,
    build_universe,
    consistency_violations,
    initial_installation,
    providers,
)

from helpers import corpus_instance, universe_from


def stanza(name, version, **kw):
    return PackageStanza(name=name, version=version, **kw)


def test_empty_universe():
    u = build_universe([])
    assert len(u) == 0
    assert u.names == [] and u.feature_index == {}


def test_name_index():
    u = build_universe([stanza("aiohttp", 3, installed=True), stanza("attr", 18)])
    assert u.name_index == {"aiohttp": (3,), "attr": (18,)}
    assert u.versions("attr") == (18,)


def test_duplicate_package():
    with pytest.raises(DuplicatePackage) as exc:
        build_universe([stanza("aiohttp", 3), stanza("aiohttp", 3)])
    assert (exc.value.name, exc.value.version) == ("aiohttp", 3)


@pytest.mark.parametrize("name", ["", "-x", "a b", "é"])
def test_bad_names(name):
    with pytest.raises(ValueError):
        stanza(name, 1)


def test_bad_version():
    with pytest.raises(ValueError):
        stanza("a", 0)


def test_relop_holds():
    assert RelOp.EQ.holds(2, 2) and not RelOp.EQ.holds(1, 2)
    assert RelOp.NEQ.holds(1, 2)
    assert RelOp.GEQ.holds(2, 2) and RelOp.GT.holds(3, 2)
    assert RelOp.LEQ.holds(2, 2) and RelOp.LT.holds(1, 2)


def test_atom_accepts_versionless_provide_only_unconstrained():
    assert VpkgAtom("f").accepts(None)
    assert not VpkgAtom("f", RelOp.GEQ, 3).accepts(None)
    assert VpkgAtom("f", RelOp.GEQ, 3).accepts(3)


def test_formula_constants():
    assert Formula(()).is_true and not Formula(()).is_false
    assert Formula(((),)).is_false


def test_providers_direct_and_virtual():
    u = build_universe([
        stanza("attr", 18),
        stanza("postfix", 2, provides=(("mail-agent", None),)),
        stanza("exim", 4, provides=(("mail-agent", 3),)),
    ])
    assert providers(u, VpkgAtom("attr")) == {PackageId("attr", 18)}
    assert providers(u, VpkgAtom("mail-agent")) == {PackageId("postfix", 2), PackageId("exim", 4)}
    assert providers(u, VpkgAtom("mail-agent", RelOp.GEQ, 3)) == {PackageId("exim", 4)}
    assert providers(u, VpkgAtom("attr", RelOp.GT, 18)) == frozenset()
    assert providers(u, VpkgAtom("nothing")) == frozenset()


def test_providers_monotone_over_corpus():
    for seed in range(60):
        u, _ = corpus_instance(seed)
        for st in u.stanzas:
            for atom in st.conflicts:
                assert providers(u, atom) <= providers(u, VpkgAtom(atom.name))


def test_initial_installation():
    u = build_universe([stanza("aiohttp", 3, installed=True), stanza("attr", 18)])
    assert initial_installation(u) == {PackageId("aiohttp", 3)}
    u = build_universe([stanza("a", 1, installed=True), stanza("a", 2, installed=True)])
    assert initial_installation(u) == {PackageId("a", 1), PackageId("a", 2)}
    assert initial_installation(build_universe([stanza("a", 1)])) == frozenset()


def test_consistency_examples():
    u, _ = universe_from("package: a\nversion: 1\ndepends: b\n\npackage: b\nversion: 1\n")
    assert consistency_violations(u, set()) == []
    [v] = consistency_violations(u, {PackageId("a", 1)})
    assert v == UnsatDependency(PackageId("a", 1), (VpkgAtom("b"),))
    assert "a" in str(v) and "b" in str(v)


def test_self_conflict_exempt():
    u, _ = universe_from("package: a\nversion: 1\nconflicts: a\n")
    assert consistency_violations(u, {PackageId("a", 1)}) == []


def test_self_conflict_exempt_for_own_feature():
    u, _ = universe_from(
        "package: a\nversion: 1\nconflicts: f\nprovides: f\n\n"
        "package: b\nversion: 1\nprovides: f\n")
    assert consistency_violations(u, {PackageId("a", 1)}) == []
    [v] = consistency_violations(u, {PackageId("a", 1), PackageId("b", 1)})
    assert isinstance(v, ConflictViolation) and v.other == PackageId("b", 1)


def test_same_name_versions_coinstallable_without_conflict():
    u, _ = universe_from("package: a\nversion: 1\n\npackage: a\nversion: 2\n")
    assert consistency_violations(u, {PackageId("a", 1), PackageId("a", 2)}) == []


def test_unknown_package_in_solution():
    u = build_universe([stanza("a", 1)])
    with pytest.raises(UnknownPackage):
        consistency_violations(u, {PackageId("zz", 1)})


def test_extra_unused_stanza_does_not_change_verdict():
    text = "package: a\nversion: 1\ndepends: b\n\npackage: b\nversion: 1\n"
    u1, _ = universe_from(text)
    u2, _ = universe_from(text + "\npackage: c\nversion: 1\ndepends: zz\n")
    for s in ({PackageId("a", 1)}, {PackageId("a", 1), PackageId("b", 1)}, set()):
        assert consistency_violations(u1, s) == consistency_violations(u2, s)


def test_solution_and_nosolution():
    s = Solution([PackageId("b", 1), PackageId("a", 2)])
    assert list(s) == [PackageId("a", 2), PackageId("b", 1)]
    assert PackageId("a", 2) in s and len(s) == 2
    assert not NoSolution and repr(NoSolution) == "NoSolution"
    assert isinstance(Universe([]), Universe)
