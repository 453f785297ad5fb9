"""Lowering decision specifications to NP-Alg queries.

Each guess ``G`` becomes a guessed relation ``Q_G`` holding the full rows
of its shaped item (source columns plus the extra fields).  Shape
constraints are stated with the function-family builders, ``G`` itself is
the projection of ``Q_G`` on the selected columns, and every CHECK turns
into one unary FAIL operand:

NOT EXISTS (q)   π$1(σ_where(FROM product))
EXISTS (q)       DOM − π$1(DOM × σ_where(FROM product))

Supported: guesses ``SELECT cols FROM <one shaped item>`` without WHERE,
whose source is a list of base tables, and checks that are (NOT) EXISTS over
a list of tables with a WHERE built from comparisons of columns and
literals under AND/OR/NOT.  Anything else raises ``UnsupportedConstruct``.

Two semantic gaps: comparing an integer with a string is a type error in
the SQL evaluator but simply false (or ordered by kind) in the algebra, and
EXISTS relies on a nonempty active domain.
"""
from __future__ import annotations

from typing import Mapping, Sequence

from ..algebra import (
    Attr,
    BaseRel,
    Cmp,
    Difference,
    GuessedRel,
    Product,
    Project,
    Ref,
    Select as ASelect,
    TruePred,
    Val,
    conj,
    disj,
    Not,
    union_all,
)
from ..engine import GuessDecl, NpAlgQuery
from ..relation import Database, Relation
from ..sugar import build_empty, fail_function, fail_injective, fail_total
from .ast import (
    BoolAnd,
    BoolNot,
    BoolOr,
    Col,
    Compare,
    Exists,
    FunctionTo,
    IntRange,
    Lit,
    PartitionOf,
    PermutationOf,
    Select,
    Specification,
    SubsetOf,
    TableRef,
)
from .lexer import ConSqlError
from .model import _Lowering, _key_columns
from .sqleval import Column, table_key


class UnsupportedConstruct(ConSqlError):
    pass


def _product(exprs):
    out = exprs[0]
    for e in exprs[1:]:
        out = Product(out, e)
    return out


def _resolve(cols: Sequence[Column], c: Col) -> int:
    q = c.qualifier.lower() if c.qualifier else None
    hits = [
        i
        for i, col in enumerate(cols)
        if col.name.lower() == c.name.lower() and (q is None or (col.qualifier or "").lower() == q)
    ]
    if len(hits) != 1:
        what = "ambiguous" if hits else "unknown"
        raise UnsupportedConstruct(f"{what} column {c.qualifier + '.' if c.qualifier else ''}{c.name}")
    return hits[0]


class _Bridge:
    def __init__(self, spec: Specification, db: Database, keys):
        if spec.objective is not None:
            raise UnsupportedConstruct("only decision specifications (no objective) lower to NP-Alg")
        self.spec = spec
        self.db = db
        self.keys = keys or {}
        self.names = {table_key(n): n for n in db.relations}
        self.extra: dict[str, Relation] = {}
        self.guesses: list[GuessDecl] = []
        self.lets: list[tuple] = []
        self.fails: list = []
        self.guessed_cols: dict[str, tuple] = {}  # table key -> column names

    def base(self, name: str) -> BaseRel:
        key = table_key(name)
        if key not in self.names:
            raise UnsupportedConstruct(f"unknown table {name}")
        return BaseRel(self.names[key])

    def add_range(self, label: str, values: Sequence[int]) -> BaseRel:
        name = f"RANGE_{label}"
        while name in self.db.relations or name in self.extra:
            name += "_"
        self.extra[name] = Relation(("v",), ((v,) for v in values))
        return BaseRel(name)

    def guess(self, g) -> None:
        q = g.query
        if q.where is not None or len(q.from_) != 1:
            raise UnsupportedConstruct(f"guess {g.name}: only a single shaped FROM item without WHERE is supported")
        item = q.from_[0]
        if isinstance(item, TableRef) or not hasattr(item, "source"):
            raise UnsupportedConstruct(f"guess {g.name}: the FROM item must be a guessable shape")
        for s in item.source:
            if not isinstance(s, TableRef):
                raise UnsupportedConstruct(f"guess {g.name}: shape sources must be base tables")
        low = _Lowering(self.spec, self.db, self.keys)
        low.shaped(g.name, item)
        comp = low.components[0]
        _, columns = low.shape_of[id(item)]
        d = len(columns) - self._extra_width(item)
        qname = f"Q_{g.name}"
        width = len(columns)
        self.guesses.append(GuessDecl(qname, width))
        fun = GuessedRel(qname)
        src = _product([self.base(s.name) for s in item.source])

        if isinstance(item, SubsetOf):
            self.fails.append(Project(Difference(fun, src), ("$1",)))
        else:
            if isinstance(item, FunctionTo):
                if isinstance(item.range, IntRange):
                    vals = self.add_range(g.name, [v[0] for v in comp.values])
                else:
                    key = table_key(item.range.name)
                    schema = self.db[self.names[key]].schema if key in self.names else ()
                    idx = _key_columns(self.keys, item.range.name, schema)
                    vals = Project(self.base(item.range.name), tuple(f"${i + 1}" for i in idx))
                total = item.total
            elif isinstance(item, PermutationOf):
                vals = self.add_range(g.name, range(1, comp.n + 1))
                total = True
            else:
                assert isinstance(item, PartitionOf)
                vals = self.add_range(g.name, range(1, comp.blocks + 1))
                total = True
            r = width - d
            self.fails.append(fail_function(fun, src, vals, d, r))
            if total:
                self.fails.append(fail_total(fun, src, vals, d, r))
            if isinstance(item, PermutationOf):
                self.fails.append(fail_injective(fun, src, vals, d, r))

        if q.items is None:
            picks = list(range(width))
            names = [c.name for c in columns]
        else:
            picks, names = [], []
            for si in q.items:
                if not isinstance(si.expr, Col):
                    raise UnsupportedConstruct(f"guess {g.name}: select items must be plain columns")
                picks.append(_resolve(columns, si.expr))
                names.append(si.alias or si.expr.name)
        if g.aliases:
            if len(g.aliases) != len(picks):
                raise UnsupportedConstruct(f"guess {g.name}: alias count does not match the select list")
            names = list(g.aliases)
        self.lets.append((g.name, Project(fun, tuple(f"${i + 1}" for i in picks))))
        self.guessed_cols[table_key(g.name)] = tuple(names)

    @staticmethod
    def _extra_width(item) -> int:
        if isinstance(item, SubsetOf):
            return 0
        if isinstance(item, FunctionTo):
            return len(item.fields)
        return 1

    def check(self, cond) -> None:
        negated = None
        if isinstance(cond, Exists):
            negated, q = cond.negated, cond.query
        elif isinstance(cond, BoolNot) and isinstance(cond.item, Exists) and not cond.item.negated:
            negated, q = True, cond.item.query
        if negated is None:
            raise UnsupportedConstruct("checks must be EXISTS or NOT EXISTS conditions")
        if not isinstance(q, Select):
            raise UnsupportedConstruct("EXISTS subqueries must be plain SELECTs")
        parts, cols = [], []
        for it in q.from_:
            if not isinstance(it, TableRef):
                raise UnsupportedConstruct("check subqueries may only list tables in FROM")
            key = table_key(it.name)
            qual = it.alias or it.name
            if key in self.guessed_cols:
                parts.append(Ref(next(n for n, _ in self.lets if table_key(n) == key)))
                names = self.guessed_cols[key]
            else:
                parts.append(self.base(it.name))
                names = self.db[self.names[key]].schema
            cols += [Column(qual, n) for n in names]
        body = _product(parts)
        pred = self.pred(q.where, cols) if q.where is not None else TruePred()
        if not isinstance(pred, TruePred):
            body = ASelect(body, pred)
        self.fails.append(Project(body, ("$1",)) if negated else build_empty(body))

    def pred(self, e, cols):
        if isinstance(e, BoolAnd):
            return conj(self.pred(e.left, cols), self.pred(e.right, cols))
        if isinstance(e, BoolOr):
            return disj(self.pred(e.left, cols), self.pred(e.right, cols))
        if isinstance(e, BoolNot):
            return Not(self.pred(e.item, cols))
        if isinstance(e, Compare):
            op = "!=" if e.op == "<>" else e.op
            return Cmp(self.operand(e.left, cols), op, self.operand(e.right, cols))
        raise UnsupportedConstruct(f"unsupported condition {type(e).__name__} in a check")

    def operand(self, e, cols):
        if isinstance(e, Col):
            return Attr(f"${_resolve(cols, e) + 1}")
        if isinstance(e, Lit):
            return Val(e.value)
        raise UnsupportedConstruct(f"unsupported operand {type(e).__name__} in a comparison")


def lower_to_npalg(
    spec: Specification, db: Database, keys: Mapping[str, Sequence[str]] | None = None
) -> tuple[NpAlgQuery, Database]:
    """An NP-Alg query plus the database extended with any range tables it needs."""
    b = _Bridge(spec, db, keys)
    for g in spec.guesses:
        if table_key(g.name) in b.names:
            raise UnsupportedConstruct(f"guessed table {g.name} clashes with a base table")
        b.guess(g)
    for c in spec.checks:
        b.check(c)
    query = NpAlgQuery(tuple(b.guesses), union_all(b.fails), tuple(b.lets), name=spec.name)
    return query, db.with_relations(b.extra)
