import io

import pytest

from cudfsolver.sat import (
    ConflictAtLevelZero,
    DimacsError,
    Solver,
    Status,
    format_result,
    parse_dimacs,
    solve_cnf,
    write_dimacs,
)

from helpers import eval_cnf, random_cnf, satisfying_rows


def to_dimacs(lit):
    return -(lit >> 1) if lit & 1 else lit >> 1


def test_contradictory_units():
    s = Solver()
    s.add_clause([1])
    with pytest.raises(ConflictAtLevelZero):
        s.add_clause([-1])


def test_tautology_ignored():
    s = Solver(2)
    s.add_clause([1, -1])
    assert s.clauses == []
    assert s.solve().sat


def test_duplicate_clause_harmless():
    s = Solver(2)
    s.add_clause([1, 2])
    s.add_clause([1, 2])
    res = s.solve([-1])
    assert res.sat and res.value(2)


def test_empty_formula():
    res = solve_cnf([], 3)
    assert res.sat and len(res.model) == 4


def test_small_unsat():
    assert solve_cnf([[1, 2], [-1], [-2]], 2).status is Status.UNSAT


def test_empty_clause_rejected_or_unsat():
    assert solve_cnf([[]], 1).status is Status.UNSAT


def test_literal_zero_rejected():
    with pytest.raises(ValueError):
        Solver().add_clause([0])


def test_n12_m50_against_enumeration():
    clauses = random_cnf(12, 12, 50)
    expected = bool(satisfying_rows(clauses, 12).any())
    res = solve_cnf(clauses, 12)
    assert res.sat == expected
    if res.sat:
        assert eval_cnf(clauses, res.model)


@pytest.mark.parametrize("n", range(1, 17))
def test_agreement_with_enumeration(n):
    for seed in range(25):
        m = round(n * (3.5 + seed % 3))
        clauses = random_cnf(1000 * n + seed, n, m, width=1 + seed % 3 if n > 2 else 1)
        expected = bool(satisfying_rows(clauses, n).any())
        res = solve_cnf(clauses, n, seed=seed)
        assert res.sat == expected
        if res.sat:
            assert eval_cnf(clauses, res.model)


def test_deterministic():
    clauses = random_cnf(99, 50, 210)
    a = solve_cnf(clauses, 50, seed=3)
    b = solve_cnf(clauses, 50, seed=3)
    assert a.status == b.status and a.model == b.model


def test_learnt_clauses_are_consequences():
    checked = 0
    for seed in range(40):
        n = 12
        clauses = random_cnf(500 + seed, n, 52)
        s = Solver(n)
        try:
            s.add_clauses(clauses)
        except ConflictAtLevelZero:
            continue
        s.solve()
        base = satisfying_rows(clauses, n)
        for c in s.learnts:
            learnt = [to_dimacs(l) for l in c.lits]
            assert (satisfying_rows(clauses + [learnt], n) == base).all()
            checked += 1
    assert checked > 0


def test_assumptions_and_core():
    s = Solver(3)
    s.add_clauses([[-1, 2], [-2, 3]])
    assert s.solve([1]).value(3)
    res = s.solve([1, -3, 2])
    assert res.status is Status.UNSAT
    assert set(res.core) <= {1, -3, 2} and res.core
    # the solver stays usable after an UNSAT answer under assumptions
    assert s.solve([-3]).sat
    assert s.solve().sat


def test_core_is_unsat():
    for seed in range(30):
        n = 14
        clauses = random_cnf(seed + 7000, n, 40)
        assumptions = [v if seed & (1 << (v % 5)) else -v for v in range(1, 8)]
        s = Solver(n)
        try:
            s.add_clauses(clauses)
        except ConflictAtLevelZero:
            continue
        res = s.solve(assumptions)
        if res.sat:
            assert all(res.value(a) for a in assumptions)
            continue
        units = [[a] for a in res.core]
        assert not satisfying_rows(clauses + units, n).any()


def test_conflict_budget_unknown():
    clauses = random_cnf(4242, 120, 512)
    res = solve_cnf(clauses, 120, conflict_budget=5)
    assert res.status is Status.UNKNOWN


def test_incremental_clause_addition():
    s = Solver(2)
    s.add_clause([1, 2])
    assert s.solve([-1]).sat
    s.add_clause([-2])
    assert s.solve([-1]).status is Status.UNSAT
    assert s.solve().value(1)


def test_dimacs_parse_and_write():
    text = "c comment\np cnf 3 2\n1 -2 0\n3\n 0\n"
    assert parse_dimacs(text) == (3, [[1, -2], [3]])
    buf = io.StringIO()
    write_dimacs([[1, -2], [3]], 3, buf)
    assert parse_dimacs(buf.getvalue()) == (3, [[1, -2], [3]])


@pytest.mark.parametrize("text", [
    "1 2 0\n", "p cnf 2 1\n1 3 0\n", "p cnf 2 2\n1 0\n", "p dnf 1 1\n1 0\n", "p cnf 1 1\nx 0\n", "",
])
def test_dimacs_errors(text):
    with pytest.raises(DimacsError):
        parse_dimacs(text)


def test_format_result():
    assert format_result(solve_cnf([[1], [-1]], 1)) == "s UNSATISFIABLE\n"
    out = format_result(solve_cnf([[1], [-2]], 2))
    assert out.startswith("s SATISFIABLE\n") and out.rstrip().endswith("0")
    assert "1 -2" in out


def test_stats_counters():
    s = Solver()
    s.add_clauses(random_cnf(5, 40, 170))
    s.solve()
    st = s.stats()
    assert st["vars"] == 40 and st["propagations"] > 0
