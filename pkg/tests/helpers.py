"""Shared corpus builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from cudfsolver.criteria import parse_criteria
from cudfsolver.gen import SplitMix64, gen_request, gen_universe

FIXTURES = Path(__file__).parent / "fixtures"
CRITERIA_TEXTS = ("paranoid", "trendy", "-changed,-removed", "+new,-removed")
CRITERIA_LISTS = tuple(parse_criteria(t) for t in CRITERIA_TEXTS)
KINDS = ("install", "remove", "upgrade", "mixed")
CORPUS_SEEDS = range(300)


def corpus_instance(seed: int, size: int | None = None):
    """Seeded (universe, request) pair; sizes cycle through 1..12 by default."""
    n = 1 + seed % 12 if size is None else size
    kind = KINDS[(seed // 12) % len(KINDS)]
    u = gen_universe(n_packages=n, seed=seed)
    return u, gen_request(u, kind, seed)


def random_cnf(seed: int, nvars: int, nclauses: int, width: int = 3) -> list[list[int]]:
    rng = SplitMix64(seed)
    clauses = []
    for _ in range(nclauses):
        k = min(width, nvars)
        vars_: list[int] = []
        while len(vars_) < k:
            v = rng.between(1, nvars)
            if v not in vars_:
                vars_.append(v)
        clauses.append([v if rng.chance(0.5) else -v for v in vars_])
    return clauses


def all_assignments(n: int) -> np.ndarray:
    """Boolean matrix of shape (2**n, n); row i is the binary expansion of i."""
    rows = np.arange(1 << n, dtype=np.int64)[:, None]
    return ((rows >> np.arange(n)) & 1).astype(bool)


def satisfying_rows(clauses, n: int) -> np.ndarray:
    """Mask of rows of :func:`all_assignments` satisfying every clause over vars 1..n."""
    a = all_assignments(n)
    ok = np.ones(len(a), dtype=bool)
    for c in clauses:
        sat = np.zeros(len(a), dtype=bool)
        for lit in c:
            col = a[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        ok &= sat
    return ok


def eval_cnf(clauses, model) -> bool:
    return all(any(model[abs(l)] == (l > 0) for l in c) for c in clauses)


def universe_from(text: str):
    """Universe and request from a CUDF snippet."""
    from cudfsolver.cudf import parse_document
    from cudfsolver.model import Request

    doc = parse_document(text)
    return doc.universe(), doc.request or Request()
