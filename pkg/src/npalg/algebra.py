"""Relational-algebra expressions and their evaluation.

Expressions are immutable dataclass trees.  ``evaluate`` is pure: the same
expression over the same database and guessed extensions always yields the
same relation.

Attribute naming: a base or guessed relation referenced as ``BaseRel("EDGES")``
exposes qualified columns ``EDGES.from``, ``EDGES.to`` (the alias defaults to
the relation name).  Products concatenate schemas, so ``$i`` always indexes
the concatenated column list.  In a ``Join`` condition the left operand of
each comparison refers to the left input and the right operand to the right
input, as in ``FUN ⋈[$1=$1 ∧ $2≠$2] FUN``.
"""
from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence, Union

from .relation import (
    ArityError,
    Constant,
    Database,
    Relation,
    RelAlgError,
    UnknownRelation,
    dom_tuples,
    qualify,
    resolve_attr,
)

# ---------------------------------------------------------------- predicates


@dataclass(frozen=True)
class Attr:
    ref: str


@dataclass(frozen=True)
class Val:
    value: Constant


Operand = Union[Attr, Val]


@dataclass(frozen=True)
class Cmp:
    left: Operand
    op: str
    right: Operand

    def __post_init__(self):
        if self.op not in _OPS:
            raise RelAlgError(f"unknown comparison operator {self.op!r}")


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Not:
    item: object


@dataclass(frozen=True)
class TruePred:
    pass


Pred = Union[Cmp, And, Or, Not, TruePred]


def _ordered(fn):
    def cmp(a, b):
        # incomparable kinds never satisfy an order comparison
        if isinstance(a, int) != isinstance(b, int):
            return False
        return fn(a, b)

    return cmp


_OPS: dict[str, Callable[[Constant, Constant], bool]] = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": _ordered(operator.lt),
    "<=": _ordered(operator.le),
    ">": _ordered(operator.gt),
    ">=": _ordered(operator.ge),
}


def _operand(x) -> Operand:
    if isinstance(x, (Attr, Val)):
        return x
    if isinstance(x, str):
        return Attr(x)
    return Val(x)


def C(left, op: str, right) -> Cmp:
    """Comparison shorthand: strings are attribute refs, other values constants.

    Wrap a string in ``Val`` to compare against a text constant.
    """
    if op == "<>":
        op = "!="
    return Cmp(_operand(left), op, _operand(right))


def conj(*items: Pred) -> Pred:
    items = tuple(i for i in items if not isinstance(i, TruePred))
    if not items:
        return TruePred()
    if len(items) == 1:
        return items[0]
    return And(items)


def disj(*items: Pred) -> Pred:
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


# --------------------------------------------------------------- expressions


class Expr:
    """Base class of algebra nodes."""

    def children(self) -> tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class BaseRel(Expr):
    name: str
    alias: str | None = None


@dataclass(frozen=True)
class GuessedRel(Expr):
    name: str
    alias: str | None = None


@dataclass(frozen=True)
class Ref(Expr):
    """Reference to a let-bound intermediate expression."""

    name: str


@dataclass(frozen=True)
class DomPower(Expr):
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ArityError(f"DOM power needs k >= 1, got {self.k}")


@dataclass(frozen=True)
class Literal(Expr):
    relation: Relation


@dataclass(frozen=True)
class Select(Expr):
    child: Expr
    pred: Pred

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Project(Expr):
    child: Expr
    attrs: tuple
    # marks projections that only reorder columns or drop copies forced
    # equal by an equi-join/selection; they do not quantify anything
    implicit: bool = False

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Rename(Expr):
    child: Expr
    mapping: tuple  # ((ref, new_name), ...)

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Product(_Binary):
    pass


@dataclass(frozen=True)
class Union_(_Binary):
    pass


@dataclass(frozen=True)
class Difference(_Binary):
    pass


@dataclass(frozen=True)
class Intersect(_Binary):
    pass


@dataclass(frozen=True)
class SymDiff(_Binary):
    pass


@dataclass(frozen=True)
class Divide(_Binary):
    pass


@dataclass(frozen=True)
class Join(Expr):
    """Theta join on ``cond``; natural join on shared column names if None."""

    left: Expr
    right: Expr
    cond: Pred | None = None

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Let(Expr):
    name: str
    value: Expr
    body: Expr

    def children(self):
        return (self.value, self.body)


# public alias; ``Union`` is taken by typing
UnionE = Union_


def walk(expr: Expr) -> Iterator[Expr]:
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def rename_all(expr: Expr, names: Sequence[str]) -> Rename:
    return Rename(expr, tuple((f"${i + 1}", n) for i, n in enumerate(names)))


def union_all(exprs: Sequence[Expr]) -> Expr:
    if not exprs:
        raise RelAlgError("union of zero expressions")
    out = exprs[0]
    for e in exprs[1:]:
        out = Union_(out, e)
    return out


def dom_product(k: int) -> Expr:
    return DomPower(k)


def project_first(expr: Expr) -> Project:
    return Project(expr, ("$1",))


# ---------------------------------------------------------------- evaluation


def compile_pred(pred: Pred, schema: Sequence[str]) -> Callable[[tuple], bool]:
    if isinstance(pred, TruePred):
        return lambda row: True
    if isinstance(pred, Cmp):
        fn = _OPS[pred.op]
        left = _compile_operand(pred.left, schema)
        right = _compile_operand(pred.right, schema)
        return lambda row: fn(left(row), right(row))
    if isinstance(pred, And):
        parts = [compile_pred(p, schema) for p in pred.items]
        return lambda row: all(p(row) for p in parts)
    if isinstance(pred, Or):
        parts = [compile_pred(p, schema) for p in pred.items]
        return lambda row: any(p(row) for p in parts)
    if isinstance(pred, Not):
        inner = compile_pred(pred.item, schema)
        return lambda row: not inner(row)
    raise RelAlgError(f"not a predicate: {pred!r}")


def _compile_operand(op: Operand, schema: Sequence[str]):
    if isinstance(op, Val):
        v = op.value
        return lambda row: v
    i = resolve_attr(schema, op.ref)
    return lambda row: row[i]


def _split_join(pred: Pred, lschema, rschema):
    """Separate hashable equalities (left attr = right attr) from the rest."""
    items = pred.items if isinstance(pred, And) else (pred,)
    keys: list[tuple[int, int]] = []
    rest: list[Pred] = []
    for p in items:
        if (
            isinstance(p, Cmp)
            and p.op == "="
            and isinstance(p.left, Attr)
            and isinstance(p.right, Attr)
        ):
            keys.append((resolve_attr(lschema, p.left.ref), resolve_attr(rschema, p.right.ref)))
        else:
            rest.append(p)
    return keys, rest


def compile_join_pred(pred: Pred, lschema, rschema) -> Callable[[tuple, tuple], bool]:
    if isinstance(pred, TruePred):
        return lambda l, r: True
    if isinstance(pred, Cmp):
        fn = _OPS[pred.op]
        left = _compile_operand(pred.left, lschema)
        right = _compile_operand(pred.right, rschema)
        return lambda l, r: fn(left(l), right(r))
    if isinstance(pred, And):
        parts = [compile_join_pred(p, lschema, rschema) for p in pred.items]
        return lambda l, r: all(p(l, r) for p in parts)
    if isinstance(pred, Or):
        parts = [compile_join_pred(p, lschema, rschema) for p in pred.items]
        return lambda l, r: any(p(l, r) for p in parts)
    if isinstance(pred, Not):
        inner = compile_join_pred(pred.item, lschema, rschema)
        return lambda l, r: not inner(l, r)
    raise RelAlgError(f"not a predicate: {pred!r}")


class Evaluator:
    """Evaluates expressions against one database and one guessed extension."""

    def __init__(self, db: Database, ext: Mapping[str, Relation] | None = None):
        self.db = db
        self.ext = ext or {}
        self._dom = db.dom_values()

    def __call__(self, expr: Expr, env: Mapping[str, Relation] | None = None) -> Relation:
        return self.eval(expr, dict(env or {}))

    def eval(self, e: Expr, env: dict) -> Relation:
        method = getattr(self, "_" + type(e).__name__, None)
        if method is None:
            raise RelAlgError(f"cannot evaluate {type(e).__name__}")
        return method(e, env)

    # leaves
    def _BaseRel(self, e: BaseRel, env):
        rel = self.db[e.name]
        alias = e.alias or e.name
        return Relation(tuple(qualify(alias, a) for a in rel.schema), rel.tuples)

    def _GuessedRel(self, e: GuessedRel, env):
        try:
            rel = self.ext[e.name]
        except KeyError:
            raise UnknownRelation(f"no extension for guessed relation {e.name!r}") from None
        alias = e.alias or e.name
        return Relation(tuple(qualify(alias, a) for a in rel.schema), rel.tuples)

    def _Ref(self, e: Ref, env):
        try:
            return env[e.name]
        except KeyError:
            raise UnknownRelation(f"unbound intermediate relation {e.name!r}") from None

    def _DomPower(self, e: DomPower, env):
        return Relation(("DOM",) * e.k, frozenset(dom_tuples(self._dom, e.k)))

    def _Literal(self, e: Literal, env):
        return e.relation

    def _Let(self, e: Let, env):
        inner = dict(env)
        inner[e.name] = self.eval(e.value, env)
        return self.eval(e.body, inner)

    # unary
    def _Select(self, e: Select, env):
        if isinstance(e.child, DomPower):
            schema = ("DOM",) * e.child.k
            test = compile_pred(e.pred, schema)
            return Relation(schema, frozenset(t for t in dom_tuples(self._dom, e.child.k) if test(t)))
        rel = self.eval(e.child, env)
        test = compile_pred(e.pred, rel.schema)
        return Relation(rel.schema, frozenset(t for t in rel.tuples if test(t)))

    def _Project(self, e: Project, env):
        rel = self.eval(e.child, env)
        idx = [rel.index(a) for a in e.attrs]
        schema = tuple(rel.schema[i] for i in idx)
        return Relation(schema, frozenset(tuple(t[i] for i in idx) for t in rel.tuples))

    def _Rename(self, e: Rename, env):
        rel = self.eval(e.child, env)
        names = list(rel.schema)
        for ref, new in e.mapping:
            names[resolve_attr(rel.schema, ref)] = new
        return Relation(tuple(names), rel.tuples)

    # binary
    def _Product(self, e: Product, env):
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        return Relation(a.schema + b.schema, frozenset(x + y for x in a.tuples for y in b.tuples))

    def _same_arity(self, a: Relation, b: Relation, what: str):
        if a.arity != b.arity:
            raise ArityError(f"{what} of arity {a.arity} and {b.arity}")

    def _Union_(self, e, env):
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        self._same_arity(a, b, "union")
        return Relation(a.schema, a.tuples | b.tuples)

    def _Difference(self, e, env):
        b = self.eval(e.right, env)
        if isinstance(e.left, DomPower):
            self._same_arity(Relation.unnamed(e.left.k), b, "difference")
            bt = b.tuples
            rows = frozenset(t for t in dom_tuples(self._dom, e.left.k) if t not in bt)
            # an active complement keeps the complemented relation's names
            return Relation(b.schema, rows)
        a = self.eval(e.left, env)
        self._same_arity(a, b, "difference")
        return Relation(a.schema, a.tuples - b.tuples)

    def _Intersect(self, e, env):
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        self._same_arity(a, b, "intersection")
        return Relation(a.schema, a.tuples & b.tuples)

    def _SymDiff(self, e, env):
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        return sym_diff(a, b)

    def _Divide(self, e, env):
        return divide(self.eval(e.left, env), self.eval(e.right, env))

    def _Join(self, e: Join, env):
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        if e.cond is None:
            return natural_join(a, b)
        keys, rest = _split_join(e.cond, a.schema, b.schema)
        test = compile_join_pred(conj(*rest), a.schema, b.schema) if rest else None
        schema = a.schema + b.schema
        if not keys:
            return Relation(
                schema,
                frozenset(x + y for x in a.tuples for y in b.tuples if test is None or test(x, y)),
            )
        li = [k[0] for k in keys]
        ri = [k[1] for k in keys]
        table: dict[tuple, list[tuple]] = {}
        for y in b.tuples:
            table.setdefault(tuple(y[i] for i in ri), []).append(y)
        out = set()
        for x in a.tuples:
            for y in table.get(tuple(x[i] for i in li), ()):
                if test is None or test(x, y):
                    out.add(x + y)
        return Relation(schema, frozenset(out))


def natural_join(a: Relation, b: Relation) -> Relation:
    common = [n for n in a.schema if n and n in b.schema]
    li = [a.schema.index(n) for n in common]
    ri = [b.schema.index(n) for n in common]
    keep = [j for j in range(b.arity) if j not in ri]
    schema = a.schema + tuple(b.schema[j] for j in keep)
    table: dict[tuple, list[tuple]] = {}
    for y in b.tuples:
        table.setdefault(tuple(y[j] for j in ri), []).append(y)
    out = set()
    for x in a.tuples:
        for y in table.get(tuple(x[i] for i in li), ()):
            out.add(x + tuple(y[j] for j in keep))
    return Relation(schema, frozenset(out))


def sym_diff(a: Relation, b: Relation) -> Relation:
    if a.arity != b.arity:
        raise ArityError(f"symmetric difference of arity {a.arity} and {b.arity}")
    return Relation(a.schema, a.tuples ^ b.tuples)


def divide(a: Relation, b: Relation) -> Relation:
    """Tuples t over a's leading columns with (t, u) in a for every u in b."""
    r = b.arity
    if r < 1 or a.arity <= r:
        raise ArityError(f"cannot divide arity {a.arity} by arity {b.arity}")
    if not b.tuples:
        raise ArityError("division by an empty relation is undefined")
    d = a.arity - r
    groups: dict[tuple, set] = {}
    for t in a.tuples:
        groups.setdefault(t[:d], set()).add(t[d:])
    need = b.tuples
    rows = frozenset(k for k, vs in groups.items() if need <= vs)
    return Relation(a.schema[:d], rows)


def evaluate(
    expr: Expr,
    db: Database,
    ext: Mapping[str, Relation] | None = None,
    env: Mapping[str, Relation] | None = None,
) -> Relation:
    """Evaluate ``expr`` over ``db`` with guessed relations taken from ``ext``."""
    return Evaluator(db, ext)(expr, env)


# ------------------------------------------------------------ static arities


def infer_arity(
    expr: Expr,
    base: Mapping[str, int],
    guessed: Mapping[str, int],
    env: Mapping[str, int] | None = None,
) -> int:
    """Arity of ``expr`` without evaluating it; raises on set-operator mismatch."""
    env = dict(env or {})

    def go(e: Expr, env: dict) -> int:
        if isinstance(e, BaseRel):
            if e.name not in base:
                raise UnknownRelation(f"no relation named {e.name!r}")
            return base[e.name]
        if isinstance(e, GuessedRel):
            if e.name not in guessed:
                raise UnknownRelation(f"undeclared guessed relation {e.name!r}")
            return guessed[e.name]
        if isinstance(e, Ref):
            if e.name not in env:
                raise UnknownRelation(f"unbound intermediate relation {e.name!r}")
            return env[e.name]
        if isinstance(e, DomPower):
            return e.k
        if isinstance(e, Literal):
            return e.relation.arity
        if isinstance(e, (Select, Rename)):
            return go(e.child, env)
        if isinstance(e, Project):
            n = go(e.child, env)
            for a in e.attrs:
                if a.startswith("$") and not 1 <= int(a[1:]) <= n:
                    raise ArityError(f"{a} out of range for arity {n}")
            return len(e.attrs)
        if isinstance(e, Product):
            return go(e.left, env) + go(e.right, env)
        if isinstance(e, Join):
            a, b = go(e.left, env), go(e.right, env)
            if e.cond is None:
                # natural join width depends on names; only positional info here
                return a + b - _natural_overlap(e)
            return a + b
        if isinstance(e, (Union_, Difference, Intersect, SymDiff)):
            a, b = go(e.left, env), go(e.right, env)
            if a != b:
                raise ArityError(f"{type(e).__name__} of arity {a} and {b}")
            return a
        if isinstance(e, Divide):
            a, b = go(e.left, env), go(e.right, env)
            if b < 1 or a <= b:
                raise ArityError(f"cannot divide arity {a} by arity {b}")
            return a - b
        if isinstance(e, Let):
            inner = dict(env)
            inner[e.name] = go(e.value, env)
            return go(e.body, inner)
        raise RelAlgError(f"unknown node {type(e).__name__}")

    return go(expr, env)


def output_names(expr: Expr) -> tuple[str, ...] | None:
    """Column names of ``expr`` when they are fixed by renames, else None."""
    if isinstance(expr, Rename) and all(ref == f"${i + 1}" for i, (ref, _) in enumerate(expr.mapping)):
        return tuple(n for _, n in expr.mapping)
    if isinstance(expr, Project) and not any(a.startswith("$") for a in expr.attrs):
        return tuple(expr.attrs)
    if isinstance(expr, Join) and expr.cond is None:
        a, b = output_names(expr.left), output_names(expr.right)
        if a is None or b is None:
            return None
        return a + tuple(n for n in b if n not in a)
    if isinstance(expr, Product):
        a, b = output_names(expr.left), output_names(expr.right)
        if a is None or b is None:
            return None
        return a + b
    if isinstance(expr, (Select,)):
        return output_names(expr.child)
    if isinstance(expr, Difference) and isinstance(expr.left, DomPower):
        return output_names(expr.right)
    if isinstance(expr, (Union_, Difference, Intersect, SymDiff)):
        return output_names(expr.left)
    if isinstance(expr, Let):
        return output_names(expr.body)
    return None


def _natural_overlap(e: Join) -> int:
    a, b = output_names(e.left), output_names(e.right)
    if a is None or b is None:
        raise ArityError("natural join arity needs statically named columns")
    return len([n for n in a if n in b])
