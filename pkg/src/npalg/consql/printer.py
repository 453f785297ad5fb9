"""Canonical text for specifications; ``parse(print(x)) == x``."""
from __future__ import annotations

from .ast import (
    Agg,
    BinOp,
    BoolAnd,
    BoolNot,
    BoolOr,
    Col,
    Compare,
    Exists,
    FunctionTo,
    InList,
    InQuery,
    IntRange,
    Lit,
    Neg,
    PartitionOf,
    PermutationOf,
    ScalarQuery,
    Script,
    Select,
    Specification,
    SubqueryRef,
    SubsetOf,
    TableRef,
    UnionQuery,
)

# binding strength, loosest first
_PREC = {"OR": 1, "AND": 2, "NOT": 3, "CMP": 4, "+": 5, "-": 5, "*": 6, "/": 6, "NEG": 7, "ATOM": 8}


def _prec(e) -> int:
    if isinstance(e, BoolOr):
        return _PREC["OR"]
    if isinstance(e, BoolAnd):
        return _PREC["AND"]
    if isinstance(e, BoolNot):
        return _PREC["NOT"]
    if isinstance(e, (Compare, InQuery, InList)):
        return _PREC["CMP"]
    if isinstance(e, Exists):
        return _PREC["NOT"] if e.negated else _PREC["ATOM"]
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["NEG"]
    return _PREC["ATOM"]


def _wrap(e, need: int, indent: int) -> str:
    text = fmt_expr(e, indent)
    return f"({text})" if _prec(e) < need else text


def _lit(v) -> str:
    if isinstance(v, int):
        return str(v)
    return "'" + str(v).replace("'", "''") + "'"


def fmt_expr(e, indent: int = 0) -> str:
    if isinstance(e, Col):
        return f"{e.qualifier}.{e.name}" if e.qualifier else e.name
    if isinstance(e, Lit):
        return _lit(e.value)
    if isinstance(e, Neg):
        return "-" + _wrap(e.item, _PREC["NEG"], indent)
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        # left-associative: the right operand needs parentheses at equal strength
        return f"{_wrap(e.left, p, indent)} {e.op} {_wrap(e.right, p + 1, indent)}"
    if isinstance(e, Agg):
        return "COUNT(*)" if e.arg is None else f"SUM({fmt_expr(e.arg, indent)})"
    if isinstance(e, ScalarQuery):
        return "(" + fmt_query(e.query, indent + 2) + ")"
    if isinstance(e, Compare):
        p = _PREC["CMP"]
        return f"{_wrap(e.left, p + 1, indent)} {e.op} {_wrap(e.right, p + 1, indent)}"
    if isinstance(e, BoolAnd):
        p = _PREC["AND"]
        return f"{_wrap(e.left, p, indent)} AND {_wrap(e.right, p + 1, indent)}"
    if isinstance(e, BoolOr):
        p = _PREC["OR"]
        return f"{_wrap(e.left, p, indent)} OR {_wrap(e.right, p + 1, indent)}"
    if isinstance(e, BoolNot):
        # a bare NOT EXISTS would re-parse as the negated EXISTS node
        inner = e.item
        if _prec(inner) < _PREC["NOT"] or (isinstance(inner, Exists) and not inner.negated):
            return f"NOT ({fmt_expr(inner, indent)})"
        return "NOT " + fmt_expr(inner, indent)
    if isinstance(e, Exists):
        word = "NOT EXISTS" if e.negated else "EXISTS"
        return f"{word} ({fmt_query(e.query, indent + 2)})"
    if isinstance(e, InQuery):
        word = "NOT IN" if e.negated else "IN"
        return f"{_wrap(e.item, _PREC['CMP'] + 1, indent)} {word} ({fmt_query(e.query, indent + 2)})"
    if isinstance(e, InList):
        word = "NOT IN" if e.negated else "IN"
        opts = ", ".join(_wrap(o, _PREC["CMP"] + 1, indent) for o in e.options)
        return f"{_wrap(e.item, _PREC['CMP'] + 1, indent)} {word} ({opts})"
    raise TypeError(f"not an expression: {e!r}")


def _fmt_source(items, indent) -> str:
    return ", ".join(fmt_from(i, indent) for i in items)


def _fmt_shape(s, indent) -> str:
    if isinstance(s, SubsetOf):
        return f"SUBSET OF {_fmt_source(s.source, indent)}"
    if isinstance(s, FunctionTo):
        if isinstance(s.range, IntRange):
            rng = f"{fmt_expr(s.range.lo)}..{fmt_expr(s.range.hi)}"
        else:
            rng = s.range.name
        prefix = "TOTAL " if s.total and s.explicit_total else ("" if s.total else "PARTIAL ")
        return f"{prefix}FUNCTION_TO({rng}) AS {', '.join(s.fields)} OF {_fmt_source(s.source, indent)}"
    if isinstance(s, PartitionOf):
        return f"PARTITION({fmt_expr(s.n)}) AS {s.field} OF {_fmt_source(s.source, indent)}"
    if isinstance(s, PermutationOf):
        return f"PERMUTATION AS {s.field} OF {_fmt_source(s.source, indent)}"
    raise TypeError(f"not a guessable FROM item: {s!r}")


def fmt_from(item, indent: int = 0) -> str:
    if isinstance(item, TableRef):
        return f"{item.name} {item.alias}" if item.alias else item.name
    if isinstance(item, SubqueryRef):
        return f"({fmt_query(item.query, indent + 2)}) {item.alias}"
    text = _fmt_shape(item, indent)
    if item.alias is not None:
        return f"({text}) {item.alias}"
    return text


def _fmt_from_list(items, indent) -> str:
    parts = []
    for i, item in enumerate(items):
        text = fmt_from(item, indent)
        # an unaliased shape swallows the rest of the list, so it must come last
        if not isinstance(item, (TableRef, SubqueryRef)) and item.alias is None and i < len(items) - 1:
            text = f"({text})"
        parts.append(text)
    return ", ".join(parts)


def fmt_query(q, indent: int = 0) -> str:
    pad = "\n" + " " * indent
    if isinstance(q, UnionQuery):
        right = fmt_query(q.right, indent)
        if isinstance(q.right, UnionQuery):
            right = f"({right})"
        return f"{fmt_query(q.left, indent)}{pad}UNION{pad}{right}"
    if not isinstance(q, Select):
        raise TypeError(f"not a query: {q!r}")
    head = "SELECT DISTINCT " if q.distinct else "SELECT "
    if q.items is None:
        cols = "*"
    else:
        cols = ", ".join(
            fmt_expr(i.expr, indent) + (f" AS {i.alias}" if i.alias else "") for i in q.items
        )
    text = f"{head}{cols}{pad}FROM {_fmt_from_list(q.from_, indent)}"
    if q.where is not None:
        text += f"{pad}WHERE {fmt_expr(q.where, indent + 2)}"
    return text


def fmt_spec(s: Specification) -> str:
    out = [f"CREATE SPECIFICATION {s.name} ("]
    for g in s.guesses:
        head = f"  GUESS TABLE {g.name}"
        if g.aliases:
            head += "(" + ", ".join(g.aliases) + ")"
        out.append(head + " AS")
        out.append("    " + fmt_query(g.query, 4))
    if s.objective is not None:
        out.append(f"  {s.objective.direction} (")
        out.append("    " + fmt_query(s.objective.query, 4))
        out.append("  )")
    for c in s.checks:
        out.append(f"  CHECK ({fmt_expr(c, 4)})")
    for r in s.returns:
        out.append(f"  RETURN TABLE {r.name} AS")
        out.append("    " + fmt_query(r.query, 4))
    out.append(")")
    return "\n".join(out)


def fmt_script(script: Script) -> str:
    parts = [fmt_spec(s) for s in script.specs]
    parts += [fmt_query(q) + ";" for q in script.statements]
    return "\n\n".join(parts) + "\n"
