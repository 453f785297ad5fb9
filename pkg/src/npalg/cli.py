"""Command-line front end.

Verbs: ``solve``, ``check``, ``classify``, ``translate``, ``gen-succinct``.
Exit status is 0 when the answer is yes, 1 when it is no, 2 on any error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .circuit import Circuit, gen_succinct_3col, solve_succinct_3col, succinct_database
from .consql.bridge import lower_to_npalg
from .consql.lexer import ConSqlError
from .consql.model import MAX_EXHAUSTIVE, lower_spec, script_tables, solve_exhaustive
from .consql.parser import parse_script
from .consql.sqleval import run_query
from .csvio import Instance, load_instance, save_db
from .engine import DEFAULT_BUDGET, BudgetExhausted, NpAlgQuery, check, fail_relation, search_exact, witness_from
from .localsearch import NpAlgProblem, ParameterError, SolverParams, run
from .polyfrag import NotInFragment, classify, solve_poly
from .relation import Database, Relation, RelAlgError
from .sexpr import format_query, parse_eso, parse_query
from .translate import build_psi

SCHEMA = 1
SOLVERS = ("exact", "hill", "tabu", "tandem", "poly")
STRATEGY = {"hill": ("hill",), "tabu": ("tabu",), "tandem": ("hill", "tabu")}

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


@dataclass
class RunReport:
    kind: str
    name: str
    solver: str
    answer: bool
    complete: bool  # the answer (and any objective) is final, not a local-search best effort
    objective: Optional[int] = None
    returns: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    statements: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "schema": SCHEMA,
            "kind": self.kind,
            "name": self.name,
            "solver": self.solver,
            "answer": self.answer,
            "complete": self.complete,
            "objective": self.objective if self.answer else None,
            "returns": {k: v for k, v in self.returns.items()} if self.answer else {},
            "stats": self.stats,
        }
        if self.statements:
            out["statements"] = self.statements
        return out


def _table_json(rel: Relation) -> dict:
    cols = [c or f"${i + 1}" for i, c in enumerate(rel.schema)]
    return {"columns": cols, "rows": [list(r) for r in rel.rows()]}


def _emit(payload: dict, args) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    sys.stdout.write(text)
    if getattr(args, "json", None):
        Path(args.json).write_text(text, encoding="utf-8")


def _read(path) -> str:
    p = Path(path)
    if not p.exists() or p.is_dir():
        raise CliError(f"{p}: no such file")
    return p.read_text(encoding="utf-8")


def _is_query(path) -> bool:
    return Path(path).suffix.lower() == ".sx"


def _instance(args) -> Instance:
    if args.data is None:
        return Instance(Database({}), {})
    return load_instance(args.data)


def _params(args) -> SolverParams:
    return SolverParams(
        seed=args.seed,
        max_iters=args.max_iters,
        restarts=args.restarts,
        tenure=args.tenure,
        max_idle=args.max_idle,
        strategy=STRATEGY.get(args.solver, ("tabu",)),
        workers=args.workers,
    )


def _stats(args, **kw) -> dict:
    out = {"seed": args.seed}
    out.update(kw)
    return out


# ------------------------------------------------------------------- solve


def _solve_query(args, query: NpAlgQuery, db: Database) -> RunReport:
    start = time.perf_counter()
    name = query.name or Path(args.path).stem
    if args.solver == "exact":
        try:
            res = search_exact(query, db, budget=args.budget, workers=args.workers)
        except BudgetExhausted as exc:
            raise CliError(f"{exc}; raise --budget or use a local-search solver") from None
        witness, complete = res.witness, True
        stats = _stats(args, examined=res.examined)
    elif args.solver == "poly":
        pr = solve_poly(query, db)
        witness, complete = pr.witness, True
        stats = _stats(args, fragment=pr.fragment)
    else:
        problem = NpAlgProblem(query, db)
        sr = run(problem, _params(args))
        witness = problem.witness(sr.state) if sr.answer else None
        complete = False
        stats = _stats(args, iterations=sr.iterations, restarts=sr.restarts_used, violations=sr.cost.violations)
    if witness is not None and not check(query, db, witness):
        raise CliError("internal error: reported witness does not make FAIL empty")
    if args.timing:
        stats["seconds"] = round(time.perf_counter() - start, 6)
    returns = {g: _table_json(r) for g, r in sorted((witness or {}).items())}
    return RunReport("npalg", name, args.solver, witness is not None, complete or witness is not None, None, returns, stats)


def _pick_spec(script, wanted: Optional[str]):
    if wanted is None:
        if len(script.specs) != 1:
            names = ", ".join(s.name for s in script.specs)
            raise CliError(f"file holds {len(script.specs)} specifications ({names}); choose one with --spec")
        return script.specs[0]
    for s in script.specs:
        if s.name.lower() == wanted.lower():
            return s
    raise CliError(f"no specification named {wanted!r}")


def _solve_spec(args, text: str, inst: Instance) -> RunReport:
    start = time.perf_counter()
    script = parse_script(text)
    spec = _pick_spec(script, args.spec)
    problem = lower_spec(spec, inst.db, inst.keys)
    if args.solver == "exact":
        budget = MAX_EXHAUSTIVE if args.budget is None else args.budget
        if problem.size() > budget:
            raise CliError(f"search space has {problem.size()} states, above --budget {budget}")
        res = solve_exhaustive(problem, max_states=budget)
        state, cost, complete = res.state, res.cost, True
        stats = _stats(args, examined=res.examined)
    elif args.solver == "poly":
        raise CliError("the poly solver takes NP-Alg queries; use classify on a specification instead")
    else:
        sr = run(problem, _params(args))
        state, cost, complete = sr.state, sr.cost, False
        stats = _stats(args, iterations=sr.iterations, restarts=sr.restarts_used)
    answer = state is not None and cost.feasible
    if answer:
        results = problem.condition_results(state)
        if not all(ok for ok, _ in results):
            raise CliError("internal error: reported solution violates a constraint")
    else:
        state = None
    stats["violations"] = cost.violations if cost is not None else None
    if args.timing:
        stats["seconds"] = round(time.perf_counter() - start, 6)
    tables = problem.return_tables(state)
    returns = {n: _table_json(r) for n, r in tables.items()}
    objective = cost.objective if answer and problem.has_objective else None
    statements = []
    if script.statements and len(script.specs) == 1:
        visible = script_tables({spec.name: tables})
        for q in script.statements:
            cols, rows = run_query(q, visible)
            statements.append({"columns": list(cols), "rows": [list(r) for r in rows]})
    # a verified yes settles a decision problem, but only a full scan proves an optimum
    final = complete or (answer and not problem.has_objective)
    report = RunReport("consql", spec.name, args.solver, answer, final, objective, returns, stats)
    report.statements = statements if answer else []
    return report


def cmd_solve(args) -> int:
    inst = _instance(args)
    if _is_query(args.path):
        report = _solve_query(args, parse_query(_read(args.path)), inst.db)
    else:
        report = _solve_spec(args, _read(args.path), inst)
    _emit(report.to_json(), args)
    return EXIT_YES if report.answer else EXIT_NO


# ------------------------------------------------------------------- check


def cmd_check(args) -> int:
    query = parse_query(_read(args.path))
    db = _instance(args).db
    try:
        raw = json.loads(_read(args.witness))
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.witness}: {exc}") from None
    if not isinstance(raw, dict):
        raise CliError(f"{args.witness}: expected an object mapping guessed names to row lists")
    unknown = set(raw) - {g.name for g in query.guesses}
    if unknown:
        raise CliError(f"witness names undeclared relations {sorted(unknown)}")
    query.validate(db)
    w = witness_from(query, raw)
    fail = fail_relation(query, db, w)
    ok = not fail
    _emit({"schema": SCHEMA, "kind": "check", "name": query.name, "answer": ok, "fail_rows": len(fail)}, args)
    return EXIT_YES if ok else EXIT_NO


# ---------------------------------------------------------------- classify


def cmd_classify(args) -> int:
    if _is_query(args.path):
        query = parse_query(_read(args.path))
    else:
        inst = _instance(args)
        spec = _pick_spec(parse_script(_read(args.path)), args.spec)
        query, _ = lower_to_npalg(spec, inst.db, inst.keys)
    fc = classify(query)
    payload = {"schema": SCHEMA, "kind": "classify", "name": query.name}
    payload.update(fc.describe())
    if args.json:
        _emit(payload, args)
    else:
        sys.stdout.write(fc.tag + "\n")
        if fc.guess is not None:
            sys.stdout.write(f"guess {fc.guess}/{fc.arity}\n")
        if fc.reason:
            sys.stdout.write(f"reason: {fc.reason}\n")
    return EXIT_YES


# --------------------------------------------------------------- translate


def _write_text(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_circuit(path) -> Circuit:
    return Circuit.from_json(_read(path))


def cmd_translate(args) -> int:
    suffix = Path(args.path).suffix.lower()
    if suffix == ".json":
        query = gen_succinct_3col(_load_circuit(args.path))
    elif suffix == ".sx":
        sentence, vocab = parse_eso(_read(args.path))
        query = build_psi(sentence, vocab)
        if args.name:
            query = NpAlgQuery(query.guesses, query.fail, query.lets, args.name)
    else:
        raise CliError(f"{args.path}: expected an ESO sentence (.sx) or a circuit (.json)")
    _write_text(format_query(query), args.output)
    return EXIT_YES


def cmd_gen_succinct(args) -> int:
    c = _load_circuit(args.path)
    query = gen_succinct_3col(c)
    if args.output:
        Path(args.output).write_text(format_query(query), encoding="utf-8")
    if args.data_out:
        save_db(succinct_database(), args.data_out)
    if not args.solve:
        if not args.output:
            sys.stdout.write(format_query(query))
        return EXIT_YES
    start = time.perf_counter()
    w = solve_succinct_3col(c)
    if w is not None and not check(query, succinct_database(), w):
        raise CliError("internal error: colouring witness failed verification")
    stats = {"nodes": 2**c.n, "gates": c.k}
    if args.timing:
        stats["seconds"] = round(time.perf_counter() - start, 6)
    report = RunReport(
        "succinct-3col", query.name, "exact", w is not None, True, None,
        {k: _table_json(v) for k, v in sorted((w or {}).items()) if k.startswith("COL")}, stats,
    )
    _emit(report.to_json(), args)
    return EXIT_YES if w is not None else EXIT_NO


# ------------------------------------------------------------------ parser


def _solver_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("solver options")
    g.add_argument("--solver", choices=SOLVERS, default="exact")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-iters", type=int, default=10_000)
    g.add_argument("--restarts", type=int, default=20)
    g.add_argument("--tenure", type=int, default=10)
    g.add_argument("--max-idle", type=int, default=None, help="tabu: stop a restart after N iterations without a new best")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--budget", type=int, default=None, help="exact: cap on examined candidates")
    g.add_argument("--timing", action="store_true", help="add wall time to the report (breaks byte-identical output)")
    return p


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="npalg", description="Guess-and-check relational queries and specifications.")
    sub = p.add_subparsers(dest="verb", required=True)
    solver = _solver_flags()

    s = sub.add_parser("solve", parents=[solver], help="decide a query (.sx) or run a specification (.sql)")
    s.add_argument("path")
    s.add_argument("--data", help="CSV instance directory")
    s.add_argument("--spec", help="specification to run when the file holds several")
    s.add_argument("--json", help="also write the report to this file")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="test a witness against a query")
    c.add_argument("path")
    c.add_argument("--data", help="CSV instance directory")
    c.add_argument("--witness", required=True, help="JSON object: guessed name -> list of rows")
    c.add_argument("--json", help="also write the report to this file")
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("classify", help="report the polynomial fragment of a query or specification")
    k.add_argument("path")
    k.add_argument("--data", help="CSV instance directory (needed for specifications)")
    k.add_argument("--spec")
    k.add_argument("--json", help="write a JSON report here and to standard output")
    k.set_defaults(func=cmd_classify)

    t = sub.add_parser("translate", help="ESO sentence (.sx) or circuit (.json) to an NP-Alg query")
    t.add_argument("path")
    t.add_argument("-o", "--output")
    t.add_argument("--name", help="query name for translated ESO sentences")
    t.set_defaults(func=cmd_translate)

    g = sub.add_parser("gen-succinct", help="succinct 3-colouring query for a circuit")
    g.add_argument("path")
    g.add_argument("-o", "--output")
    g.add_argument("--data-out", help="write the {0,1} database as CSV here")
    g.add_argument("--solve", action="store_true", help="decide the instance and print a report")
    g.add_argument("--json", help="also write the report to this file")
    g.add_argument("--timing", action="store_true")
    g.set_defaults(func=cmd_gen_succinct)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget", None) is None and getattr(args, "solver", None) == "exact" and _is_query(args.path):
        args.budget = DEFAULT_BUDGET
    try:
        return args.func(args)
    except (CliError, ConSqlError, RelAlgError, ParameterError, NotInFragment, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
