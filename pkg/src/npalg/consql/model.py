"""Lowering a specification plus a database into a search problem.

Each shaped FROM item of a guess becomes one search-space component.  The
component's rows live in a hidden table; the guessed table itself is the
guess query evaluated over those hidden tables, so the WHERE clause of a
guess (``ar.id = at.id`` in the landing example) is applied on every state.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from ..relation import Database, Relation, row_key
from ..space import Component, Cost, all_states, space_size
from .ast import (
    Exists,
    FunctionTo,
    IntRange,
    PartitionOf,
    PermutationOf,
    RangeTable,
    Select,
    Specification,
    SubsetOf,
    TableRef,
)
from .sqleval import (
    Column,
    Compiler,
    CompiledQuery,
    Runtime,
    SemanticError,
    SqlTypeError,
    table_key,
)

MAX_EXHAUSTIVE = 10**6


def _hidden_key(guess: str, i: int) -> str:
    return f"\x00{guess.upper()}#{i}"


def _const_int(e, what: str) -> int:
    c = Compiler({})
    c.scopes.append([])
    v = c.expr(e, 0)(Runtime({}))
    if isinstance(v, bool) or not isinstance(v, int):
        raise SemanticError(f"{what} must be an integer constant, got {v!r}")
    return v


def base_tables(db: Database) -> tuple[dict, dict]:
    """(schemas, rows) keyed by upper-cased table name."""
    schemas, rows = {}, {}
    for name, rel in db.relations.items():
        key = table_key(name)
        if key in schemas:
            raise SemanticError(f"tables {name!r} and another differ only in case")
        schemas[key] = rel.schema
        rows[key] = rel.rows()
    return schemas, rows


def _key_columns(keys: Mapping[str, Sequence[str]], table: str, schema: Sequence[str]) -> list[int]:
    names = {table_key(k): v for k, v in (keys or {}).items()}.get(table_key(table))
    if names is None:
        if not schema:
            raise SemanticError(f"table {table} has no columns to use as a key")
        return [0]
    if isinstance(names, str):
        names = [names]
    low = [c.lower() for c in schema]
    out = []
    for n in names:
        if n.lower() not in low:
            raise SemanticError(f"key column {n!r} is not a column of {table}")
        out.append(low.index(n.lower()))
    return out


@dataclass
class GuessPlan:
    name: str
    columns: tuple
    query: CompiledQuery


@dataclass
class CheckPlan:
    text: object  # the condition AST
    count_query: Optional[CompiledQuery]  # set for top-level (NOT) EXISTS
    negated: bool
    fn: object


@dataclass
class SearchProblem:
    spec: Specification
    components: tuple
    guesses: list
    checks: list
    objective: Optional[CompiledQuery]
    maximize: bool
    returns: list
    base_rows: dict
    schemas: dict = field(repr=False, default_factory=dict)

    @property
    def has_objective(self) -> bool:
        return self.objective is not None

    def size(self) -> int:
        return space_size(self.components)

    # -- state instantiation
    def tables(self, state) -> dict:
        tables = dict(self.base_rows)
        for comp, s in zip(self.components, state):
            tables[comp.name] = comp.rows(s)
        rt = Runtime(tables)
        for g in self.guesses:
            tables[table_key(g.name)] = sorted(set(g.query.rows(rt)), key=row_key)
        return tables

    def guessed(self, state) -> dict[str, Relation]:
        tables = self.tables(state)
        return {g.name: Relation(g.columns, tables[table_key(g.name)]) for g in self.guesses}

    # -- evaluation
    def condition_results(self, state, tables=None) -> list[tuple[bool, int]]:
        rt = Runtime(tables if tables is not None else self.tables(state))
        return [_eval_check(c, rt) for c in self.checks]

    def objective_value(self, state, tables=None) -> int:
        if self.objective is None:
            raise SemanticError(f"{self.spec.name} has no objective")
        rt = Runtime(tables if tables is not None else self.tables(state))
        return _scalar(self.objective.rows(rt))

    def cost(self, state) -> Cost:
        tables = self.tables(state)
        violations = sum(n for _, n in self.condition_results(state, tables))
        obj = self.objective_value(state, tables) if self.objective is not None else None
        return Cost(violations, obj, self.maximize)

    def return_tables(self, state=None) -> dict[str, Relation]:
        """RETURN tables plus ANSWER; every table is empty when ``state`` is None."""
        out = {}
        rt = Runtime(self.tables(state)) if state is not None else None
        for name, cq in self.returns:
            rows = cq.rows(rt) if rt is not None else ()
            out[name] = Relation(cq.columns, rows)
        out["ANSWER"] = Relation(("n",), [(1,)] if state is not None else [])
        return out


def _scalar(rows) -> int:
    if len(rows) != 1 or len(rows[0]) != 1:
        raise SqlTypeError(f"objective must yield one row with one column, got {rows!r}")
    v = rows[0][0]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SqlTypeError(f"objective value {v!r} is not a number")
    return v


def _eval_check(c: CheckPlan, rt: Runtime) -> tuple[bool, int]:
    if c.count_query is not None:
        if c.negated:
            n = len(c.count_query.rows(rt))
            return n == 0, n
        for _ in c.count_query.run(rt):
            return True, 0
        return False, 1
    ok = bool(c.fn(rt))
    return ok, 0 if ok else 1


# ------------------------------------------------------------------ lowering


class _Lowering:
    def __init__(self, spec: Specification, db: Database, keys):
        self.spec = spec
        self.db = db
        self.keys = keys or {}
        self.schemas, self.rows = base_tables(db)
        self.components: list[Component] = []
        self.shape_of: dict[int, tuple] = {}  # id(item) -> (key, columns)

    def source(self, items) -> tuple[list[Column], list[tuple]]:
        c = Compiler(self.schemas)
        cols: list[Column] = []
        for it in items:
            cs, _ = c.from_item(it, 0)
            cols.extend(cs)
        cq = Compiler(self.schemas).query(Select(None, tuple(items)), 0)
        rows = sorted(set(cq.rows(Runtime(self.rows))), key=row_key)
        return cols, rows

    def range_values(self, rng) -> tuple:
        if isinstance(rng, IntRange):
            lo, hi = _const_int(rng.lo, "range bound"), _const_int(rng.hi, "range bound")
            return tuple((v,) for v in range(lo, hi + 1))
        assert isinstance(rng, RangeTable)
        key = table_key(rng.name)
        if key not in self.schemas:
            raise SemanticError(f"unknown range table {rng.name}")
        idx = _key_columns(self.keys, rng.name, self.schemas[key])
        return tuple(sorted({tuple(r[i] for i in idx) for r in self.rows[key]}, key=row_key))

    def shaped(self, guess: str, item) -> None:
        cols, domain = self.source(item.source)
        extra: tuple
        if isinstance(item, SubsetOf):
            comp = dict(kind="subset")
            extra = ()
        elif isinstance(item, FunctionTo):
            values = self.range_values(item.range)
            if values and len(values[0]) != len(item.fields):
                raise SemanticError(
                    f"FUNCTION_TO names {len(item.fields)} field(s) for a {len(values[0])}-column key"
                )
            if item.total and domain and not values:
                raise SemanticError(f"total function in {guess} has an empty range")
            comp = dict(kind="function", values=values, total=item.total)
            extra = tuple(item.fields)
        elif isinstance(item, PermutationOf):
            comp = dict(kind="permutation")
            extra = (item.field,)
        elif isinstance(item, PartitionOf):
            n = _const_int(item.n, "PARTITION size")
            if n < 1:
                raise SemanticError(f"PARTITION needs at least one block, got {n}")
            comp = dict(kind="partition", blocks=n)
            extra = (item.field,)
        else:
            raise SemanticError(f"unknown FROM shape {type(item).__name__}")
        if item.alias:
            columns = [Column(item.alias, c.name) for c in cols] + [Column(item.alias, f) for f in extra]
        else:
            columns = cols + [Column(None, f) for f in extra]
        key = _hidden_key(guess, len(self.components))
        self.components.append(Component(key, domain=tuple(domain), columns=tuple(columns), **comp))
        self.shape_of[id(item)] = (key, columns)

    def resolve_shape(self, item):
        try:
            return self.shape_of[id(item)]
        except KeyError:
            raise SemanticError("guessable FROM items may only appear in a GUESS clause") from None

    def guess(self, g) -> GuessPlan:
        q = g.query
        for item in q.from_:
            if not isinstance(item, TableRef) and hasattr(item, "source"):
                self.shaped(g.name, item)
        cq = Compiler(self.schemas, self.resolve_shape).query(q, 0)
        columns = tuple(g.aliases) if g.aliases else cq.columns
        if len(columns) != len(cq.columns):
            raise SemanticError(f"{g.name} names {len(columns)} columns but selects {len(cq.columns)}")
        self._prefilter_subset(q)
        return GuessPlan(g.name, columns, cq)

    def _prefilter_subset(self, q: Select) -> None:
        """A lone SUBSET item with a WHERE clause only ranges over rows passing it."""
        if len(q.from_) != 1 or not isinstance(q.from_[0], SubsetOf) or q.where is None:
            return
        item = q.from_[0]
        key, _ = self.shape_of[id(item)]
        idx = next(i for i, c in enumerate(self.components) if c.name == key)
        comp = self.components[idx]
        probe = Compiler(self.schemas, self.resolve_shape).query(Select(None, (item,), q.where), 0)
        tables = dict(self.rows)
        tables[key] = list(comp.domain)
        keep = set(probe.rows(Runtime(tables)))
        domain = tuple(d for d in comp.domain if d in keep)
        self.components[idx] = Component(key, "subset", domain, columns=comp.columns)


def lower_spec(spec: Specification, db: Database, keys: Mapping[str, Sequence[str]] | None = None) -> SearchProblem:
    """Build the search space and compile every clause of ``spec`` against ``db``.

    ``keys`` overrides the key column(s) of range tables; the default key is
    the first column.
    """
    low = _Lowering(spec, db, keys)
    plans = []
    for g in spec.guesses:
        k = table_key(g.name)
        if k in low.schemas:
            raise SemanticError(f"guessed table {g.name} clashes with a base table")
        plans.append(low.guess(g))
    schemas = dict(low.schemas)
    for p in plans:
        if table_key(p.name) in schemas:
            raise SemanticError(f"guessed table {p.name} is defined twice")
        schemas[table_key(p.name)] = p.columns

    checks = []
    for cond in spec.checks:
        c = Compiler(schemas)
        c.scopes.append([])
        if isinstance(cond, Exists):
            checks.append(CheckPlan(cond, c.query(cond.query, 1), cond.negated, None))
        else:
            checks.append(CheckPlan(cond, None, False, c.cond(cond, 0)))

    objective = None
    maximize = False
    if spec.objective is not None:
        objective = Compiler(schemas).query(spec.objective.query, 0)
        if len(objective.columns) != 1:
            raise SemanticError("the objective query must return one column")
        maximize = spec.objective.direction.upper() == "MAXIMIZE"

    returns = []
    for r in spec.returns:
        if r.name.upper() == "ANSWER":
            raise SemanticError("ANSWER is a reserved return table")
        returns.append((r.name, Compiler(schemas).query(r.query, 0)))

    return SearchProblem(
        spec=spec,
        components=tuple(low.components),
        guesses=plans,
        checks=checks,
        objective=objective,
        maximize=maximize,
        returns=returns,
        base_rows=low.rows,
        schemas=schemas,
    )


# ------------------------------------------------------------- convenience


def eval_condition(problem: SearchProblem, index: int, state) -> tuple[bool, int]:
    return _eval_check(problem.checks[index], Runtime(problem.tables(state)))


def eval_objective(problem: SearchProblem, state) -> int:
    return problem.objective_value(state)


def eval_returns(problem: SearchProblem, state=None) -> dict[str, Relation]:
    return problem.return_tables(state)


@dataclass
class ExhaustiveResult:
    state: Optional[tuple]
    cost: Optional[Cost]
    examined: int
    seconds: float

    @property
    def answer(self) -> bool:
        return self.cost is not None and self.cost.feasible


def solve_exhaustive(problem, max_states: int = MAX_EXHAUSTIVE) -> ExhaustiveResult:
    """Scan every state; decision problems stop at the first feasible one.

    Works for any problem exposing ``components`` and ``cost``.  Ties keep the
    first state in enumeration order.
    """
    n = space_size(problem.components)
    if n > max_states:
        raise SemanticError(f"search space has {n} states, above the exhaustive limit of {max_states}")
    start = time.perf_counter()
    best, best_cost, examined = None, None, 0
    decision = not getattr(problem, "has_objective", False)
    for state in all_states(problem.components):
        examined += 1
        c = problem.cost(state)
        if not c.feasible:
            continue
        if best_cost is None or c < best_cost:
            best, best_cost = state, c
            if decision:
                break
    return ExhaustiveResult(best, best_cost, examined, time.perf_counter() - start)


def script_tables(results: Mapping[str, Mapping[str, Relation]]) -> dict[str, tuple]:
    """Tables ``Problem.TABLE`` for post-solve statements, keyed for ``run_query``."""
    out = {}
    for spec_name, tables in results.items():
        for tname, rel in tables.items():
            out[f"{spec_name}.{tname}"] = (rel.schema, rel.rows())
    return out
