import json

import pytest
from hypothesis import given, strategies as st

from cudfsolver.criteria import parse_criteria
from cudfsolver.model import NoSolution, PackageId, RelOp, Solution, VpkgAtom, check_name
from cudfsolver.optimizer import solve_upgrade
from cudfsolver.semver import (
    Lockfile,
    Manifest,
    MappingGap,
    SemverVersion,
    TranslateError,
    compile_range,
    cudf_name,
    lift_solution,
    load_lockfile,
    load_manifest,
    load_registry,
    parse_range,
    range_matches,
    registry_from_entries,
    translate,
)

from helpers import FIXTURES

V = SemverVersion.parse
PARANOID = parse_criteria("paranoid")


def attr_registry():
    return registry_from_entries([{"name": "attr", "versions": {
        "18.2.0": {}, "18.3.0": {}, "19.0.0": {}}}])


def test_version_order():
    order = ["0.9.9", "1.0.0-alpha", "1.0.0-beta", "1.0.0", "1.0.1", "1.10.0", "2.0.0"]
    assert sorted(order, key=V) == order
    assert str(V("v1.2.3")) == "1.2.3" and str(V("1.2.3-rc1")) == "1.2.3-rc1"
    with pytest.raises(ValueError):
        V("1.2")


@pytest.mark.parametrize("rng,version,expected", [
    (">= 4.3.*", "4.3.7", True),
    (">= 4.3.*", "4.3.0", True),
    (">= 4.3.*", "4.2.9", False),
    ("^18.2.0", "19.0.0", False),
    ("^18.2.0", "18.9.1", True),
    ("^18.2.0", "18.1.0", False),
    ("~1.2.3", "1.3.0", False),
    ("~1.2.3", "1.2.9", True),
    ("~1.2", "1.2.0", True),
    ("~1", "1.9.0", True),
    ("~1", "2.0.0", False),
    ("^0.2.3", "0.2.9", True),
    ("^0.2.3", "0.3.0", False),
    ("^0.0.3", "0.0.4", False),
    ("1.x", "1.5.2", True),
    ("1.x", "2.0.0", False),
    ("*", "7.7.7", True),
    ("", "0.0.1", True),
    ("!=4.3.0", "4.3.0", False),
    ("!=4.3.0", "4.3.1", True),
    ("=18.2.0", "18.2.0", True),
    ("18", "18.4.0", True),
    (">=1.0.0 <2.0.0", "1.9.9", True),
    (">=1.0.0, <2.0.0", "2.0.0", False),
    ("<1 || >=3", "0.5.0", True),
    ("<1 || >=3", "2.0.0", False),
    (">1.2", "1.2.9", False),
    (">1.2", "1.3.0", True),
    ("<=1.2", "1.2.9", True),
    ("<=1.2", "1.3.0", False),
    ("<2.0.0", "2.0.0-rc1", True),
    ("^2.0.0-rc1", "2.0.0", True),
])
def test_range_table(rng, version, expected):
    assert range_matches(rng, version) is expected


@pytest.mark.parametrize("bad", [">>1", "1.2.3.4", "abc", "^", "1 - 2"])
def test_bad_ranges(bad):
    with pytest.raises(ValueError):
        parse_range(bad)


def test_compile_caret_example():
    doc, vm = translate(Manifest("app", V("1.0.0"), {"attr": parse_range("^18.2.0")}),
                        attr_registry())
    atoms = compile_range("attr", parse_range("^18.2.0"), vm)
    assert atoms == (VpkgAtom("attr", RelOp.EQ, 1), VpkgAtom("attr", RelOp.EQ, 2))
    root = doc.packages[-1]
    assert root.name == "app+root" and root.depends.conjuncts == (atoms,)


def test_compile_no_match_has_no_provider():
    doc, vm = translate(Manifest("app", V("1.0.0")), attr_registry())
    [atom] = compile_range("attr", parse_range(">=20"), vm)
    assert not doc.universe().providers(atom)


def test_empty_manifest_and_registry():
    doc, vm = translate(Manifest("app", V("1.0.0")), {})
    assert [p.id for p in doc.packages] == [PackageId("app+root", 1)]
    assert doc.request.install == (VpkgAtom("app+root"),)
    assert doc.request_label == "app@1.0.0"


def test_qualifier_gating():
    m = Manifest("app", V("1.0.0"), qualified_dependencies={"test": {"attr": parse_range("*")}})
    doc, _ = translate(m, attr_registry())
    assert doc.packages[-1].depends.is_true
    doc, _ = translate(m, attr_registry(), active_qualifiers={"test"})
    assert len(doc.packages[-1].depends.conjuncts) == 1


def test_qualified_and_plain_constraints_both_hold():
    m = Manifest("app", V("1.0.0"), {"attr": parse_range("^18")},
                 {"test": {"attr": parse_range(">=18.3")}})
    doc, vm = translate(m, attr_registry(), active_qualifiers={"test"})
    s = solve_upgrade(doc.universe(), doc.request, PARANOID)
    assert lift_solution(s, vm, m, PARANOID).resolved == {"attr": V("18.3.0")}


def test_every_stanza_conflicts_with_own_name():
    doc, _ = translate(load_manifest(FIXTURES / "manifests" / "app.json"),
                       load_registry(FIXTURES / "registry"))
    for st_ in doc.packages[:-1]:
        assert VpkgAtom(st_.name) in st_.conflicts


def test_order_preservation():
    reg = load_registry(FIXTURES / "registry")
    _, vm = translate(Manifest("app", V("1.0.0")), reg)
    for name, entries in reg.items():
        versions = [v for v, _ in entries]
        for a in versions:
            for b in versions:
                if a < b:
                    assert vm.rank(name, a) < vm.rank(name, b)


def test_lift_solution_examples():
    m = Manifest("app", V("1.0.0"), {"attr": parse_range("^18.2.0")})
    _, vm = translate(m, attr_registry())
    assert lift_solution(Solution({vm.root}), vm, m, PARANOID).resolved == {}
    lock = lift_solution(Solution({vm.root, PackageId("attr", 2)}), vm, m, PARANOID)
    assert lock.resolved == {"attr": V("18.3.0")}
    with pytest.raises(MappingGap):
        lift_solution(Solution({PackageId("ghost", 1)}), vm, m, PARANOID)
    with pytest.raises(MappingGap):
        lift_solution(Solution({PackageId("attr", 9)}), vm, m, PARANOID)


def test_self_dependency_rejected():
    with pytest.raises(TranslateError):
        Manifest("app", V("1.0.0"), {"app": parse_range("*")})


def test_duplicate_registry_version(tmp_path):
    (tmp_path / "a.json").write_text('{"name": "a", "versions": {"1.0.0": {}, "1.0.0": {}}}')
    with pytest.raises(TranslateError):
        load_registry(tmp_path)
    with pytest.raises(TranslateError):
        registry_from_entries([{"name": "a", "versions": {"1.0.0": {}}},
                               {"name": "a", "versions": {"1.0.0": {}}}])


def test_lockfile_round_trip(tmp_path):
    lock = Lockfile({"attr": V("18.3.0"), "six": V("2.0.0-rc1")}, "app@1.0.0", "paranoid")
    path = tmp_path / "app.lock"
    path.write_text(lock.dumps())
    assert load_lockfile(path) == lock
    assert json.loads(lock.dumps())["resolved"] == {"attr": "18.3.0", "six": "2.0.0-rc1"}


def test_manifest_round_trip():
    m = load_manifest(FIXTURES / "manifests" / "app.json")
    assert Manifest.from_dict(m.to_dict()) == m


def test_locked_install_and_upgrade():
    reg = attr_registry()
    m = Manifest("app", V("1.0.0"), {"attr": parse_range("^18")})
    locked = Lockfile({"attr": V("18.2.0")}, "app@1.0.0", "paranoid")
    doc, vm = translate(m, reg, locked)
    s = solve_upgrade(doc.universe(), doc.request, PARANOID)
    assert lift_solution(s, vm, m, PARANOID).resolved == {"attr": V("18.2.0")}
    doc, vm = translate(m, reg, locked, req_kind="upgrade")
    trendy = parse_criteria("trendy")
    s = solve_upgrade(doc.universe(), doc.request, trendy)
    assert lift_solution(s, vm, m, trendy).resolved == {"attr": V("18.3.0")}


def test_missing_dependency_is_infeasible():
    m = load_manifest(FIXTURES / "manifests" / "impossible.json")
    doc, _ = translate(m, load_registry(FIXTURES / "registry"))
    assert solve_upgrade(doc.universe(), doc.request, PARANOID) is NoSolution


@given(st.text(min_size=1, max_size=12))
def test_cudf_name_valid(name):
    out = cudf_name(name)
    assert check_name(out) == out


@given(st.text(min_size=1, max_size=8), st.text(min_size=1, max_size=8))
def test_cudf_name_injective(a, b):
    if a != b:
        assert cudf_name(a) != cudf_name(b)
