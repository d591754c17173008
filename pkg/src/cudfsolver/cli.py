"""Optimizing dependency solver for CUDF upgrade problems.

Exit codes: 0 solution found / valid, 1 no solution / invalid, 2 usage, I/O
or parse error, 3 resource budget exhausted.
"""

from __future__ import annotations

import argparse
import logging
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from .checker import check
from .criteria import CriteriaParseError, format_criteria, objective_vector, parse_criteria
from .cudf import ParseError, parse_document, parse_solution, print_document, print_solution
from .model import ModelError, NoSolution, Request
from .optimizer import Budget, DEFAULT_CONFLICT_BUDGET, Unknown, solve_upgrade
from .semver import MappingGap, TranslateError

EXIT_OK, EXIT_FAIL, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2, 3
DEFAULT_TIMEOUT = 60.0

log = logging.getLogger("cudfsolver")


class CliError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror}") from None


def _load_problem(path: str):
    doc = parse_document(_read(path))
    return doc, doc.universe(), doc.request or Request()


def _report_objective(u, criteria, s) -> None:
    vec = objective_vector(u, criteria, s)
    parts = " ".join(f"{c}={v}" for c, v in zip(criteria, vec))
    print(f"# objective: {parts}", file=sys.stderr)


def _emit(result, u, criteria, out: Optional[str]) -> int:
    if result is NoSolution:
        _write(out, print_solution(NoSolution))
        return EXIT_FAIL
    if isinstance(result, Unknown):
        print("budget exhausted before optimality was proven", file=sys.stderr)
        if result.best is None:
            return EXIT_UNKNOWN
        result = result.best
        _write(out, print_solution(result))
        _report_objective(u, criteria, result)
        return EXIT_UNKNOWN
    _write(out, print_solution(result))
    _report_objective(u, criteria, result)
    return EXIT_OK


def run_external(command: str, doc, u, criteria_text: str, timeout: float):
    """Solve through an external solver using the ``CMD problem out criteria`` convention.

    Returns (exit status of the solver, parsed solution or None).
    """
    with tempfile.TemporaryDirectory(prefix="cudfsolver-") as tmp:
        problem = Path(tmp, "problem.cudf")
        output = Path(tmp, "solution.cudf")
        problem.write_text(print_document(doc), encoding="utf-8")
        argv = shlex.split(command) + [str(problem), str(output), criteria_text]
        log.debug("running %s", argv)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError:
            raise CliError(f"external solver not found: {argv[0]}") from None
        except subprocess.TimeoutExpired:
            raise CliError(f"external solver timed out after {timeout:g}s") from None
        if proc.returncode not in (EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN):
            raise CliError(
                f"external solver failed with status {proc.returncode}: {proc.stderr.strip()}"
            )
        if proc.returncode == EXIT_UNKNOWN and not (output.exists() and output.stat().st_size):
            return proc.returncode, None
        if not output.exists():
            raise CliError("external solver produced no output file")
        # an empty document is the empty installation
        return proc.returncode, parse_solution(output.read_text(encoding="utf-8"), u)


# -- commands ---------------------------------------------------------------------


def cmd_solve(args) -> int:
    criteria = parse_criteria(args.criteria)
    doc, u, r = _load_problem(args.problem)
    external = args.external or os.environ.get("CUDF_SOLVER")
    if not external:
        result = solve_upgrade(u, r, criteria, Budget(args.budget))
        return _emit(result, u, criteria, args.out)

    status, result = run_external(external, doc, u, format_criteria(criteria), args.timeout)
    if result is None:
        return _emit(Unknown(None), u, criteria, args.out)
    if result is not NoSolution:
        report = check(u, r, result)
        if not report.valid:
            for line in report.lines():
                print(line, file=sys.stderr)
            raise CliError("external solver returned an invalid solution")
        if status == EXIT_UNKNOWN:
            result = Unknown(result)
    return _emit(result, u, criteria, args.out)


def cmd_bridge(args) -> int:
    """Entry point matching the external-solver calling convention."""
    if len(args.operands) != 3:
        raise CliError("bridge expects exactly PROBLEM OUT CRITERIA")
    problem, out, criteria = args.operands
    ns = argparse.Namespace(problem=problem, out=out, criteria=criteria,
                            external=None, budget=args.budget, timeout=DEFAULT_TIMEOUT)
    os.environ.pop("CUDF_SOLVER", None)
    return cmd_solve(ns)


def cmd_check(args) -> int:
    doc, u, r = _load_problem(args.problem)
    try:
        sol = parse_solution(_read(args.solution), u)
    except ModelError as e:
        print(f"INVALID\n{e}")
        return EXIT_FAIL
    if sol is NoSolution:
        print("INVALID\nsolution document is FAIL")
        return EXIT_FAIL
    report = check(u, r, sol)
    print(report.verdict)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.valid else EXIT_FAIL


def cmd_oracle(args) -> int:
    from .oracle import CapExceeded, brute_force

    criteria = parse_criteria(args.criteria)
    doc, u, r = _load_problem(args.problem)
    try:
        result = brute_force(u, r, criteria, cap=args.cap)
    except CapExceeded as e:
        raise CliError(str(e)) from None
    if result is NoSolution:
        return _emit(NoSolution, u, criteria, args.out)
    print(f"# optimal solutions: {len(result.solutions)}", file=sys.stderr)
    return _emit(result.witness, u, criteria, args.out)


def _translate(args):
    from .semver import load_lockfile, load_manifest, load_registry, translate

    manifest = load_manifest(args.manifest)
    registry = load_registry(args.registry)
    installed = load_lockfile(args.lock) if args.lock else None
    kind = "upgrade" if args.upgrade else "install"
    doc, mapping = translate(manifest, registry, installed, set(args.qualifiers), kind)
    return manifest, doc, mapping


def cmd_translate(args) -> int:
    _, doc, _ = _translate(args)
    _write(args.out, print_document(doc))
    return EXIT_OK


def cmd_lock(args) -> int:
    from .semver import lift_solution

    manifest, doc, mapping = _translate(args)
    criteria = parse_criteria(args.criteria)
    u, r = doc.universe(), doc.request
    result = solve_upgrade(u, r, criteria, Budget(args.budget))
    if isinstance(result, Unknown):
        print("budget exhausted before a lockfile could be computed", file=sys.stderr)
        return EXIT_UNKNOWN
    if result is NoSolution:
        print(f"no solution for {manifest.identity}", file=sys.stderr)
        root = u[mapping.root]
        for disjunct in root.depends.conjuncts:
            if not any(u.providers(a) for a in disjunct):
                alts = " | ".join(map(str, disjunct))
                print(f"unsatisfiable dependency: {alts}", file=sys.stderr)
        return EXIT_FAIL
    lock = lift_solution(result, mapping, manifest, args.criteria)
    _write(args.out, lock.dumps())
    return EXIT_OK


def _int_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("-")
    return int(lo), int(hi or lo)


def cmd_gen(args) -> int:
    from .cudf import CudfDocument
    from .gen import gen_request, gen_universe

    u = gen_universe(args.packages, _int_range(args.versions), args.dep_density,
                     args.conflict_density, args.installed_fraction, args.seed)
    r = gen_request(u, args.kind, args.seed)
    _write(args.out, print_document(CudfDocument(packages=u.stanzas, request=r)))
    return EXIT_OK


def cmd_sat(args) -> int:
    from .sat import DimacsError, Status, format_result, parse_dimacs, solve_cnf

    try:
        nvars, clauses = parse_dimacs(_read(args.cnf))
    except DimacsError as e:
        raise CliError(str(e)) from None
    result = solve_cnf(clauses, nvars, conflict_budget=args.budget, seed=args.seed)
    sys.stdout.write(format_result(result))
    return {Status.SAT: EXIT_OK, Status.UNSAT: EXIT_FAIL, Status.UNKNOWN: EXIT_UNKNOWN}[result.status]


def cmd_bench(args) -> int:
    from .bench import format_table, run_bench, write_csv

    sizes = [int(x) for x in args.sizes.split(",")]
    seeds = [int(x) for x in args.seeds.split(",")]
    rows = run_bench(sizes, seeds, parse_criteria(args.criteria), jobs=args.jobs)
    print(format_table(rows))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv(rows, fh)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cudfsolver", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a CUDF upgrade problem")
    s.add_argument("problem")
    s.add_argument("--criteria", default="paranoid")
    s.add_argument("--out")
    s.add_argument("--external", metavar="CMD",
                   help="external solver command (default: $CUDF_SOLVER)")
    s.add_argument("--budget", type=int, default=DEFAULT_CONFLICT_BUDGET,
                   help="conflict budget")
    s.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT,
                   help="external solver timeout in seconds")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bridge", help="external-solver entry point: PROBLEM OUT CRITERIA")
    s.add_argument("--budget", type=int, default=DEFAULT_CONFLICT_BUDGET)
    # criteria such as "-changed,-removed" look like options to argparse
    s.add_argument("operands", nargs=argparse.REMAINDER, metavar="PROBLEM OUT CRITERIA")
    s.set_defaults(func=cmd_bridge)

    s = sub.add_parser("check", help="validate a solution against a problem")
    s.add_argument("problem")
    s.add_argument("solution")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("oracle", help="brute-force optimum for small problems")
    s.add_argument("problem")
    s.add_argument("--criteria", default="paranoid")
    s.add_argument("--out")
    s.add_argument("--cap", type=int, default=20)
    s.set_defaults(func=cmd_oracle)

    for name, func, helptext in (
        ("translate", cmd_translate, "semver manifest + registry to CUDF"),
        ("lock", cmd_lock, "resolve a semver manifest into a lockfile"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("manifest")
        s.add_argument("--registry", required=True, help="registry directory")
        s.add_argument("--lock", help="existing lockfile (current installation)")
        s.add_argument("--with", dest="qualifiers", action="append", default=[],
                       metavar="TAG", help="activate qualified dependencies")
        s.add_argument("--upgrade", action="store_true", help="upgrade instead of install")
        s.add_argument("--out")
        if name == "lock":
            s.add_argument("--criteria", default="paranoid")
            s.add_argument("--budget", type=int, default=DEFAULT_CONFLICT_BUDGET)
        s.set_defaults(func=func)

    s = sub.add_parser("gen", help="generate a random CUDF problem")
    s.add_argument("--packages", type=int, default=12)
    s.add_argument("--versions", default="1-3", help="versions per name, LO-HI")
    s.add_argument("--dep-density", type=float, default=0.35)
    s.add_argument("--conflict-density", type=float, default=0.15)
    s.add_argument("--installed-fraction", type=float, default=0.4)
    s.add_argument("--kind", choices=("install", "remove", "upgrade", "mixed"), default="mixed")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("sat", help="solve a DIMACS CNF file")
    s.add_argument("cnf")
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_sat)

    s = sub.add_parser("bench", help="scalability benchmark")
    s.add_argument("--sizes", default="100,1000,10000")
    s.add_argument("--seeds", default="1,2,3,4,5")
    s.add_argument("--criteria", default="paranoid")
    s.add_argument("--csv")
    s.add_argument("--jobs", type=int, default=1, help="parallel workers (timings unreliable)")
    s.set_defaults(func=cmd_bench)
    return p


def _join_criteria(argv: Sequence[str]) -> list[str]:
    """Turn ``--criteria -changed,-removed`` into ``--criteria=-changed,-removed``."""
    out: list[str] = []
    it = iter(argv)
    for arg in it:
        if arg == "--criteria":
            value = next(it, None)
            if value is not None:
                arg = f"--criteria={value}"
        out.append(arg)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_criteria(sys.argv[1:] if argv is None else argv))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ParseError, CriteriaParseError, ModelError, TranslateError,
            MappingGap, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"error: {e.filename or ''}: {e.strerror}", file=sys.stderr)
        return EXIT_ERROR
    except KeyError as e:
        print(f"error: missing field {e}", file=sys.stderr)
        return EXIT_ERROR
