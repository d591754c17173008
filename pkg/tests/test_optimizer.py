import pytest

from cudfsolver.checker import check
from cudfsolver.criteria import objective_vector, parse_criteria
from cudfsolver.cudf import parse_document
from cudfsolver.model import NoSolution, PackageId, Request, Solution
from cudfsolver.optimizer import Budget, LexOptimizer, Unknown, solve_upgrade
from cudfsolver.oracle import brute_force

from helpers import CRITERIA_LISTS, FIXTURES, corpus_instance, universe_from

PARANOID = parse_criteria("paranoid")
A_DEPENDS_B = ("package: a\nversion: 1\ndepends: b\n\npackage: b\nversion: 1\n\n"
               "package: b\nversion: 2\n\nrequest:\ninstall: a\n")


def preference_key(u, s):
    """Tie-break order: per name, highest version present, lower versions absent."""
    key = []
    for name in u.names:
        chosen = False
        for v in reversed(u.versions(name)):
            present = PackageId(name, v) in s.installed
            key.append(0 if present != chosen else 1)
            chosen = chosen or present
    return key


def test_identity_for_empty_request():
    u, r = universe_from("package: a\nversion: 1\ninstalled: true\n\npackage: b\nversion: 1\n")
    s = solve_upgrade(u, r, PARANOID)
    assert s == Solution(u.initial_installation())
    assert objective_vector(u, PARANOID, s) == (0, 0)


def test_tie_broken_to_highest_version():
    u, r = universe_from(A_DEPENDS_B)
    s = solve_upgrade(u, r, PARANOID)
    assert s.installed == {PackageId("a", 1), PackageId("b", 2)}
    assert objective_vector(u, PARANOID, s) == (0, 2)


def test_install_without_provider():
    u, r = universe_from("package: a\nversion: 1\n\nrequest:\ninstall: zz\n")
    assert solve_upgrade(u, r, PARANOID) is NoSolution


def test_trendy_identity_up_to_date():
    u, r = universe_from("package: a\nversion: 1\ninstalled: true\n")
    s = solve_upgrade(u, r, parse_criteria("trendy"))
    assert objective_vector(u, parse_criteria("trendy"), s) == (0, 0, 0, 0)


def test_maximize_new():
    u, r = universe_from("package: a\nversion: 1\n\npackage: b\nversion: 1\nconflicts: a\n\n"
                         "package: c\nversion: 1\n")
    crit = parse_criteria("+new")
    s = solve_upgrade(u, r, crit)
    assert objective_vector(u, crit, s) == (2,)


def test_merlin_fixture():
    doc = parse_document((FIXTURES / "canonical" / "merlin.cudf").read_text())
    u, r = doc.universe(), doc.request
    crit = parse_criteria("-changed,-removed")
    s = solve_upgrade(u, r, crit)
    assert objective_vector(u, crit, s) == (2, 0)
    assert s.installed == {
        PackageId("base", 1), PackageId("core", 1), PackageId("csexp", 2), PackageId("merlin", 1),
        PackageId("ocaml", 1), PackageId("ppx", 1), PackageId("yojson", 1)}


def test_unknown_on_tiny_budget():
    u, r = corpus_instance(0, size=400)
    # a zero budget never reaches a proof
    result = LexOptimizer(u, r, PARANOID, Budget(conflicts=0)).run()
    assert isinstance(result, Unknown) and result.best is None


def test_unknown_keeps_best_solution():
    found = False
    for seed in range(40):
        u, r = corpus_instance(seed, size=300)
        result = LexOptimizer(u, r, parse_criteria("+new,-removed"), Budget(conflicts=3)).run()
        if isinstance(result, Unknown) and result.best is not None:
            assert check(u, r, result.best).valid
            found = True
            break
    assert found


def test_stats_populated():
    for seed in range(20):
        u, r = corpus_instance(seed, size=50)
        opt = LexOptimizer(u, r, PARANOID)
        if opt.run() is not NoSolution:
            break
    st = opt.stats
    assert st.variables >= len(u) and st.encode_size == st.clauses > 0
    assert st.solver_calls >= 1 and len(st.layer_values) == 2


@pytest.mark.parametrize("seed", range(0, 96, 3))
def test_matches_oracle(seed):
    u, r = corpus_instance(seed)
    for crit in CRITERIA_LISTS:
        s = solve_upgrade(u, r, crit)
        o = brute_force(u, r, crit)
        assert (s is NoSolution) == (o is NoSolution)
        if s is not NoSolution:
            assert check(u, r, s).valid
            assert objective_vector(u, crit, s) == o.vector
            assert s == min(o.solutions, key=lambda t: preference_key(u, t))


def test_layer_monotonicity():
    """Optimizing a prefix of the criteria reaches the same prefix values."""
    full = parse_criteria("-removed,-notuptodate,-unsat_recommends,-new,-changed")
    for seed in range(0, 120, 5):
        u, r = corpus_instance(seed)
        s = solve_upgrade(u, r, full)
        if s is NoSolution:
            continue
        vec = objective_vector(u, full, s)
        for k in range(1, len(full)):
            prefix = full[:k]
            t = solve_upgrade(u, r, prefix)
            assert objective_vector(u, prefix, t) == vec[:k]


def test_deterministic_output():
    u, r = corpus_instance(17, size=200)
    a = solve_upgrade(u, r, parse_criteria("trendy"))
    b = solve_upgrade(u, r, parse_criteria("trendy"))
    assert a == b


def test_none_request_defaults_to_empty():
    u, _ = universe_from("package: a\nversion: 1\n")
    assert solve_upgrade(u, None, PARANOID) == Solution()
    assert solve_upgrade(u, Request(), PARANOID) == Solution()
