"""Syntax tree of specifications and the SQL subset they use.

All nodes are frozen dataclasses, so structural equality is plain ``==``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

# ------------------------------------------------------------------ scalars


@dataclass(frozen=True)
class Col:
    qualifier: Optional[str]
    name: str


@dataclass(frozen=True)
class Lit:
    value: Union[int, str]


@dataclass(frozen=True)
class Neg:
    item: object


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Agg:
    func: str  # COUNT or SUM
    arg: object = None  # None means COUNT(*)


@dataclass(frozen=True)
class ScalarQuery:
    query: object


# ----------------------------------------------------------------- booleans


@dataclass(frozen=True)
class Compare:
    op: str  # = <> < <= > >=
    left: object
    right: object


@dataclass(frozen=True)
class BoolAnd:
    left: object
    right: object


@dataclass(frozen=True)
class BoolOr:
    left: object
    right: object


@dataclass(frozen=True)
class BoolNot:
    item: object


@dataclass(frozen=True)
class Exists:
    query: object
    negated: bool = False


@dataclass(frozen=True)
class InQuery:
    item: object
    query: object
    negated: bool = False


@dataclass(frozen=True)
class InList:
    item: object
    options: tuple
    negated: bool = False


BOOL_NODES = (Compare, BoolAnd, BoolOr, BoolNot, Exists, InQuery, InList)

# ------------------------------------------------------------------ queries


@dataclass(frozen=True)
class SelectItem:
    expr: object
    alias: Optional[str] = None


@dataclass(frozen=True)
class Select:
    items: Optional[tuple]  # None is SELECT *
    from_: tuple
    where: object = None
    distinct: bool = False


@dataclass(frozen=True)
class UnionQuery:
    left: object
    right: object


@dataclass(frozen=True)
class TableRef:
    name: str  # may be "Problem.TABLE" for post-solve statements
    alias: Optional[str] = None


@dataclass(frozen=True)
class SubqueryRef:
    query: object
    alias: str


# ----------------------------------------------------- guessable FROM items


@dataclass(frozen=True)
class RangeTable:
    name: str


@dataclass(frozen=True)
class IntRange:
    lo: object
    hi: object


@dataclass(frozen=True)
class SubsetOf:
    source: tuple
    alias: Optional[str] = None


@dataclass(frozen=True)
class FunctionTo:
    range: object  # RangeTable or IntRange
    fields: tuple
    source: tuple
    total: bool = True
    alias: Optional[str] = None
    explicit_total: bool = False  # TOTAL written out; kept for faithful printing


@dataclass(frozen=True)
class PartitionOf:
    n: object
    field: str
    source: tuple
    alias: Optional[str] = None


@dataclass(frozen=True)
class PermutationOf:
    field: str
    source: tuple
    alias: Optional[str] = None


SHAPED = (SubsetOf, FunctionTo, PartitionOf, PermutationOf)

# --------------------------------------------------------- specifications


@dataclass(frozen=True)
class GuessTable:
    name: str
    aliases: Optional[tuple]
    query: Select


@dataclass(frozen=True)
class Objective:
    direction: str  # MINIMIZE or MAXIMIZE
    query: object


@dataclass(frozen=True)
class ReturnTable:
    name: str
    query: object


@dataclass(frozen=True)
class Specification:
    name: str
    guesses: tuple
    objective: Optional[Objective]
    checks: tuple
    returns: tuple = ()


@dataclass(frozen=True)
class Script:
    specs: tuple
    statements: tuple = ()  # post-solve SELECT queries
