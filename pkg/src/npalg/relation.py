"""Relations, databases and the active domain.

Constants are plain Python ``int`` and ``str`` values.  Strings are treated as
uninterpreted symbols: the algebra only ever tests them for equality, and the
total order below exists purely so that output is deterministic.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Mapping, Sequence, Union

Constant = Union[int, str]
Row = tuple


class RelAlgError(Exception):
    """Base class for relational-algebra errors."""


class SchemaError(RelAlgError):
    pass


class UnknownRelation(RelAlgError):
    pass


class ArityError(RelAlgError):
    pass


class AttributeLookupError(RelAlgError):
    pass


def const_key(value: Constant) -> tuple:
    # integers before text; never used for query semantics
    if isinstance(value, int):
        return (0, value, "")
    return (1, 0, str(value))


def row_key(row: Row) -> tuple:
    return tuple(const_key(v) for v in row)


def resolve_attr(schema: Sequence[str], ref: str) -> int:
    """Return the 0-based column index named by *ref*.

    ``$i`` is positional (1-based).  A plain name matches either a full
    column name or the part after the last dot of a qualified one.
    """
    if ref.startswith("$"):
        try:
            idx = int(ref[1:])
        except ValueError:
            raise AttributeLookupError(f"bad positional attribute {ref!r}") from None
        if not 1 <= idx <= len(schema):
            raise AttributeLookupError(f"{ref} out of range for arity {len(schema)}")
        return idx - 1
    exact = [i for i, name in enumerate(schema) if name == ref]
    if len(exact) == 1:
        return exact[0]
    if len(exact) > 1:
        raise AttributeLookupError(f"ambiguous attribute {ref!r} in {list(schema)}")
    if "." not in ref:
        low = ref.lower()
        hits = [i for i, name in enumerate(schema) if name.rsplit(".", 1)[-1].lower() == low]
    else:
        low = ref.lower()
        hits = [i for i, name in enumerate(schema) if name.lower() == low]
    if len(hits) == 1:
        return hits[0]
    if not hits:
        raise AttributeLookupError(f"unknown attribute {ref!r} in {list(schema)}")
    raise AttributeLookupError(f"ambiguous attribute {ref!r} in {list(schema)}")


def qualify(alias: str, attr: str) -> str:
    if not attr:
        return alias
    return f"{alias}.{attr.rsplit('.', 1)[-1]}"


class Relation:
    """An immutable set of equal-arity tuples with an ordered schema."""

    __slots__ = ("schema", "tuples", "_hash")

    def __init__(self, schema: Sequence[str], tuples: Iterable[Row] = ()):
        self.schema = tuple(schema)
        ts = tuples if isinstance(tuples, frozenset) else frozenset(tuple(t) for t in tuples)
        arity = len(self.schema)
        for t in ts:
            if len(t) != arity:
                raise SchemaError(f"tuple {t!r} has arity {len(t)}, schema has {arity}")
        self.tuples = ts
        self._hash = None

    @classmethod
    def unnamed(cls, arity: int, tuples: Iterable[Row] = ()) -> "Relation":
        return cls(("",) * arity, tuples)

    @classmethod
    def unary(cls, values: Iterable[Constant], name: str = "") -> "Relation":
        return cls((name,), ((v,) for v in values))

    @property
    def arity(self) -> int:
        return len(self.schema)

    def __len__(self) -> int:
        return len(self.tuples)

    def __bool__(self) -> bool:
        return bool(self.tuples)

    def __contains__(self, row: Row) -> bool:
        return tuple(row) in self.tuples

    def __iter__(self) -> Iterator[Row]:
        return iter(self.rows())

    def rows(self) -> list[Row]:
        return sorted(self.tuples, key=row_key)

    def index(self, ref: str) -> int:
        return resolve_attr(self.schema, ref)

    def with_schema(self, schema: Sequence[str]) -> "Relation":
        if len(schema) != self.arity:
            raise ArityError(f"cannot rename arity-{self.arity} relation to {list(schema)}")
        return Relation(schema, self.tuples)

    def same_tuples(self, other: "Relation") -> bool:
        return self.arity == other.arity and self.tuples == other.tuples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.schema == other.schema and self.tuples == other.tuples

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.schema, self.tuples))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(map(repr, self.rows()[:8]))
        more = ", ..." if len(self.tuples) > 8 else ""
        return f"Relation({list(self.schema)}, {{{body}{more}}})"


class Database:
    """Named base relations plus their active domain."""

    def __init__(self, relations: Mapping[str, Relation] | None = None):
        self.relations: dict[str, Relation] = dict(relations or {})
        self._dom: Relation | None = None
        self._dom_sorted: list[Constant] | None = None

    def __getitem__(self, name: str) -> Relation:
        try:
            return self.relations[name]
        except KeyError:
            raise UnknownRelation(f"no relation named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.relations

    def names(self) -> list[str]:
        return sorted(self.relations)

    @property
    def dom(self) -> Relation:
        if self._dom is None:
            self._dom = active_domain(self)
        return self._dom

    def dom_values(self) -> list[Constant]:
        if self._dom_sorted is None:
            self._dom_sorted = [t[0] for t in self.dom.rows()]
        return self._dom_sorted

    def with_relations(self, extra: Mapping[str, Relation]) -> "Database":
        merged = dict(self.relations)
        merged.update(extra)
        return Database(merged)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Database):
            return NotImplemented
        return self.relations == other.relations

    def __repr__(self) -> str:
        return f"Database({self.names()})"


def active_domain(db: Database) -> Relation:
    values: set[Constant] = set()
    for rel in db.relations.values():
        for t in rel.tuples:
            values.update(t)
    return Relation(("DOM",), ((v,) for v in values))


def dom_tuples(values: Sequence[Constant], k: int) -> Iterator[Row]:
    """Stream DOM^k in lexicographic order of the (sorted) value list."""
    if k < 1:
        raise ArityError(f"DOM power needs k >= 1, got {k}")
    return itertools.product(values, repeat=k)


def dom_power(db: Database, k: int) -> Relation:
    if k < 1:
        raise ArityError(f"DOM power needs k >= 1, got {k}")
    return Relation(("DOM",) * k, dom_tuples(db.dom_values(), k))
