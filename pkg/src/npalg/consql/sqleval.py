"""Compiling queries and conditions of the SQL subset into Python closures.

Queries are compiled once against a static catalogue of table schemas and
then run many times against changing table contents, which is what local
search needs: the guessed tables change on every move while the query text
does not.  Results are bags (lists of tuples) except for UNION and DISTINCT,
which remove duplicates.

Compiled closures take a ``Runtime``: the current table contents plus one
row slot per query nesting level, so correlated subqueries read outer rows
directly from their slot.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

from .ast import (
    BOOL_NODES,
    Agg,
    BinOp,
    BoolAnd,
    BoolNot,
    BoolOr,
    Col,
    Compare,
    Exists,
    InList,
    InQuery,
    Lit,
    Neg,
    ScalarQuery,
    Select,
    SubqueryRef,
    TableRef,
    UnionQuery,
)
from .lexer import ConSqlError

MAX_DEPTH = 32


class SemanticError(ConSqlError):
    pass


class SqlTypeError(ConSqlError):
    pass


class Runtime:
    __slots__ = ("tables", "rows", "agg")

    def __init__(self, tables: Mapping[str, list]):
        self.tables = tables
        self.rows: list = [None] * MAX_DEPTH
        self.agg: list = [None] * MAX_DEPTH


@dataclass(frozen=True)
class Column:
    qualifier: str | None
    name: str


Fn = Callable[[Runtime], object]


def table_key(name: str) -> str:
    return name.upper()


# ------------------------------------------------------------------ helpers


def _kind(v) -> str:
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, str):
        return "text"
    return type(v).__name__


def _same_kind(a, b, what: str):
    if _kind(a) != _kind(b):
        raise SqlTypeError(f"cannot {what} {_kind(a)} {a!r} and {_kind(b)} {b!r}")


_CMP = {
    "=": lambda a, b: a == b,
    "<>": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def compare(op: str, a, b) -> bool:
    _same_kind(a, b, "compare")
    return _CMP[op](a, b)


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SqlTypeError(f"{what} needs integers, got {_kind(v)} {v!r}")
    return v


def arith(op: str, a, b) -> int:
    a, b = _int(a, op), _int(b, op)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        raise SqlTypeError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _conjuncts(e) -> list:
    if isinstance(e, BoolAnd):
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def _has_agg(e) -> bool:
    """Aggregates at this query level (not inside nested subqueries)."""
    if isinstance(e, Agg):
        return True
    if isinstance(e, (BinOp, Compare, BoolAnd, BoolOr)):
        return _has_agg(e.left) or _has_agg(e.right)
    if isinstance(e, (Neg, BoolNot)):
        return _has_agg(e.item)
    return False


def output_name(item, i: int) -> str:
    if item.alias:
        return item.alias
    if isinstance(item.expr, Col):
        return item.expr.name
    if isinstance(item.expr, Agg):
        return item.expr.func.lower()
    return f"col{i + 1}"


# ----------------------------------------------------------------- compiler


@dataclass
class CompiledQuery:
    columns: tuple  # output column names
    run: Callable[[Runtime], Iterator[tuple]]
    level: int

    def rows(self, rt: Runtime) -> list:
        return list(self.run(rt))


ShapeResolver = Callable[[object], tuple]  # item -> (table key, [Column, ...])


class Compiler:
    """Compiles against ``schemas``: table key -> column names."""

    def __init__(self, schemas: Mapping[str, Sequence[str]], shapes: ShapeResolver | None = None):
        self.schemas = {table_key(k): tuple(v) for k, v in schemas.items()}
        self.shapes = shapes
        self.scopes: list[list[Column]] = []
        self.track: list[tuple[int, set]] = []  # open (level, column reads) frames

    # -- name resolution
    def resolve(self, c: Col) -> tuple[int, int]:
        q = c.qualifier.lower() if c.qualifier else None
        n = c.name.lower()
        for level in range(len(self.scopes) - 1, -1, -1):
            hits = [
                i
                for i, col in enumerate(self.scopes[level])
                if col.name.lower() == n and (q is None or (col.qualifier or "").lower() == q)
            ]
            if len(hits) > 1:
                raise SemanticError(f"ambiguous column reference {_show(c)}")
            if hits:
                return level, hits[0]
        raise SemanticError(f"unknown column {_show(c)}")

    # -- scalar and boolean expressions
    def expr(self, e, level: int, agg_ok: bool = False, in_agg: bool = False) -> Fn:
        if isinstance(e, Lit):
            v = e.value
            return lambda rt: v
        if isinstance(e, Col):
            lv, idx = self.resolve(e)
            if lv == level and agg_ok and not in_agg:
                raise SemanticError(f"column {_show(e)} must appear inside an aggregate")
            for tl, seen in self.track:
                if tl == lv:
                    seen.add(idx)
            return lambda rt: rt.rows[lv][idx]
        if isinstance(e, Neg):
            f = self.expr(e.item, level, agg_ok, in_agg)
            return lambda rt: -_int(f(rt), "negation")
        if isinstance(e, BinOp):
            f = self.expr(e.left, level, agg_ok, in_agg)
            g = self.expr(e.right, level, agg_ok, in_agg)
            op = e.op
            return lambda rt: arith(op, f(rt), g(rt))
        if isinstance(e, Agg):
            if not agg_ok or in_agg:
                raise SemanticError(f"{e.func} is only allowed in a select list")
            if e.func == "COUNT":
                return lambda rt: len(rt.agg[level])
            f = self.expr(e.arg, level, agg_ok, in_agg=True)

            def total(rt):
                acc = 0
                for row in rt.agg[level]:
                    rt.rows[level] = row
                    acc += _int(f(rt), "SUM")
                return acc

            return total
        if isinstance(e, ScalarQuery):
            cq = self.query(e.query, level + 1)
            if len(cq.columns) != 1:
                raise SemanticError("a scalar subquery must return one column")

            def scalar(rt):
                rows = cq.rows(rt)
                if len(rows) != 1:
                    raise SqlTypeError(f"scalar subquery returned {len(rows)} rows")
                return rows[0][0]

            return scalar
        if isinstance(e, Compare):
            f = self.expr(e.left, level, agg_ok, in_agg)
            g = self.expr(e.right, level, agg_ok, in_agg)
            op = e.op
            return lambda rt: compare(op, f(rt), g(rt))
        if isinstance(e, BoolAnd):
            f = self.cond(e.left, level, agg_ok, in_agg)
            g = self.cond(e.right, level, agg_ok, in_agg)
            return lambda rt: f(rt) and g(rt)
        if isinstance(e, BoolOr):
            f = self.cond(e.left, level, agg_ok, in_agg)
            g = self.cond(e.right, level, agg_ok, in_agg)
            return lambda rt: f(rt) or g(rt)
        if isinstance(e, BoolNot):
            f = self.cond(e.item, level, agg_ok, in_agg)
            return lambda rt: not f(rt)
        if isinstance(e, Exists):
            cq = self.query(e.query, level + 1)
            neg = e.negated

            def exists(rt):
                for _ in cq.run(rt):
                    return not neg
                return neg

            return exists
        if isinstance(e, InQuery):
            f = self.expr(e.item, level, agg_ok, in_agg)
            cq = self.query(e.query, level + 1)
            if len(cq.columns) != 1:
                raise SemanticError("IN needs a single-column subquery")
            neg = e.negated

            def inq(rt):
                v = f(rt)
                found = False
                for (w,) in cq.run(rt):
                    _same_kind(v, w, "compare")
                    if v == w:
                        found = True
                        break
                return found != neg

            return inq
        if isinstance(e, InList):
            f = self.expr(e.item, level, agg_ok, in_agg)
            opts = [self.expr(o, level, agg_ok, in_agg) for o in e.options]
            neg = e.negated

            def inl(rt):
                v = f(rt)
                return any(compare("=", v, o(rt)) for o in opts) != neg

            return inl
        raise SemanticError(f"unsupported expression {type(e).__name__}")

    def cond(self, e, level: int, agg_ok: bool = False, in_agg: bool = False) -> Fn:
        if not isinstance(e, BOOL_NODES):
            raise SemanticError(f"expected a condition, got {type(e).__name__}")
        return self.expr(e, level, agg_ok, in_agg)

    # -- FROM items
    def from_item(self, item, level: int):
        """(columns, rows-producing closure) for one FROM item."""
        if isinstance(item, TableRef):
            key = table_key(item.name)
            if key not in self.schemas:
                raise SemanticError(f"unknown table {item.name}")
            qual = item.alias or item.name
            cols = [Column(qual, c) for c in self.schemas[key]]
            return cols, lambda rt: rt.tables[key]
        if isinstance(item, SubqueryRef):
            saved, saved_track = self.scopes, self.track
            self.scopes, self.track = saved[:level], []
            try:
                cq = self.query(item.query, level)
            finally:
                self.scopes, self.track = saved, saved_track
            cols = [Column(item.alias, c) for c in cq.columns]
            return cols, cq.rows
        if self.shapes is None:
            raise SemanticError("a guessable FROM item can only define a guessed table")
        key, cols = self.shapes(item)
        return list(cols), lambda rt: rt.tables[key]

    # -- queries
    def query(self, q, level: int) -> CompiledQuery:
        if level >= MAX_DEPTH:
            raise SemanticError("queries nested too deeply")
        if isinstance(q, UnionQuery):
            a = self.query(q.left, level)
            b = self.query(q.right, level)
            if len(a.columns) != len(b.columns):
                raise SemanticError("UNION operands have different widths")

            def union(rt):
                seen = set()
                for part in (a, b):
                    for row in part.run(rt):
                        if row not in seen:
                            seen.add(row)
                            yield row

            return CompiledQuery(a.columns, union, level)
        if not isinstance(q, Select):
            raise SemanticError(f"not a query: {type(q).__name__}")
        return self.select(q, level)

    def select(self, q: Select, level: int) -> CompiledQuery:
        sources = []
        scope: list[Column] = []
        offsets = []
        for item in q.from_:
            cols, fn = self.from_item(item, level)
            offsets.append(len(scope))
            sources.append((fn, len(cols)))
            scope.extend(cols)
        self.scopes.append(scope)
        try:
            n = len(sources)
            ends = [offsets[i] + sources[i][1] for i in range(n)]

            def item_of(idx: int) -> int:
                for i in range(n):
                    if idx < ends[i]:
                        return i
                raise AssertionError(idx)

            # place every WHERE conjunct at the first item binding all its columns
            filters: list[list[Fn]] = [[] for _ in range(max(n, 1))]
            hashed: list[list[tuple[int, Fn]]] = [[] for _ in range(max(n, 1))]
            for c in _conjuncts(q.where) if q.where is not None else []:
                key = self._hash_key(c, level, offsets, ends, item_of)
                if key is not None:
                    pos, col_in_item, probe = key
                    hashed[pos].append((col_in_item, probe))
                    continue
                fn, used = self._tracked(lambda: self.cond(c, level), level)
                pos = max((item_of(i) for i in used), default=0)
                filters[pos].append(fn)

            aggregated = q.items is not None and any(_has_agg(i.expr) for i in q.items)
            if q.items is None:
                columns = tuple(c.name for c in scope)
                project = None
            else:
                columns = tuple(output_name(i, k) for k, i in enumerate(q.items))
                project = [self.expr(i.expr, level, agg_ok=aggregated) for i in q.items]
        finally:
            self.scopes.pop()

        distinct = q.distinct

        def product(rt) -> Iterator[tuple]:
            tables = [fn(rt) for fn, _ in sources]
            indexes = []
            for i, probes in enumerate(hashed):
                if not probes:
                    indexes.append(None)
                    continue
                cols = [c for c, _ in probes]
                index: dict = {}
                kinds = set()
                for row in tables[i]:
                    k = tuple(row[c] for c in cols)
                    index.setdefault(k, []).append(row)
                    kinds.add(tuple(_kind(v) for v in k))
                indexes.append((index, [p for _, p in probes], kinds))

            def rec(i: int, prefix: tuple):
                if i == n:
                    yield prefix
                    return
                idx = indexes[i]
                if idx is None:
                    candidates = tables[i]
                else:
                    rt.rows[level] = prefix
                    k = tuple(p(rt) for p in idx[1])
                    if idx[2] and tuple(_kind(v) for v in k) not in idx[2]:
                        raise SqlTypeError(f"cannot compare values {k!r} with column values of another type")
                    candidates = idx[0].get(k, ())
                checks = filters[i]
                for row in candidates:
                    full = prefix + row
                    if checks:
                        rt.rows[level] = full
                        if not all(f(rt) for f in checks):
                            continue
                    yield from rec(i + 1, full)

            if n == 0:
                return
            yield from rec(0, ())

        if aggregated:

            def run(rt):
                rows = list(product(rt))
                rt.agg[level] = rows
                yield tuple(f(rt) for f in project)

        elif project is None:

            def run(rt):
                if distinct:
                    seen = set()
                    for row in product(rt):
                        if row not in seen:
                            seen.add(row)
                            yield row
                else:
                    yield from product(rt)

        else:

            def run(rt):
                seen = set()
                for row in product(rt):
                    rt.rows[level] = row
                    out = tuple(f(rt) for f in project)
                    if distinct:
                        if out in seen:
                            continue
                        seen.add(out)
                    yield out

        return CompiledQuery(columns, run, level)

    def _tracked(self, build, level: int):
        frame = (level, set())
        self.track.append(frame)
        try:
            return build(), frame[1]
        finally:
            self.track.remove(frame)

    def _hash_key(self, c, level, offsets, ends, item_of):
        """(item, column within item, probe) for `item.col = <earlier stuff>`."""
        if not (isinstance(c, Compare) and c.op == "="):
            return None
        for col_side, other in ((c.left, c.right), (c.right, c.left)):
            if not isinstance(col_side, Col):
                continue
            try:
                lv, idx = self.resolve(col_side)
            except SemanticError:
                return None
            if lv != level:
                continue
            pos = item_of(idx)
            probe, used = self._tracked(lambda: self.expr(other, level), level)
            if all(item_of(i) < pos for i in used):
                return pos, idx - offsets[pos], probe
        return None


def _show(c: Col) -> str:
    return f"{c.qualifier}.{c.name}" if c.qualifier else c.name


# ------------------------------------------------------------ entry points


def compile_query(q, schemas: Mapping[str, Sequence[str]], shapes: ShapeResolver | None = None) -> CompiledQuery:
    return Compiler(schemas, shapes).query(q, 0)


def compile_condition(e, schemas: Mapping[str, Sequence[str]]) -> Fn:
    c = Compiler(schemas)
    c.scopes.append([])  # level 0 binds no columns; subqueries start at level 1
    return c.cond(e, 0)


def run_query(q, tables: Mapping[str, tuple]) -> tuple[tuple, list]:
    """Evaluate ``q`` over ``tables``: key -> (columns, rows)."""
    schemas = {k: cols for k, (cols, _) in tables.items()}
    cq = compile_query(q, schemas)
    rt = Runtime({table_key(k): list(rows) for k, (_, rows) in tables.items()})
    return cq.columns, cq.rows(rt)
