"""NP-Alg queries: guessed relations plus a FAIL expression.

A query answers "yes" on a database when some extension of its guessed
relations over the active domain makes FAIL evaluate to the empty relation.
``solve_exact`` decides this by plain enumeration and serves as the oracle
for every other solver in the package.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .algebra import (
    BaseRel,
    DomPower,
    Evaluator,
    Expr,
    GuessedRel,
    Let,
    Product,
    Project,
    Ref,
    Difference,
    infer_arity,
    walk,
)
from .relation import Constant, Database, Relation, RelAlgError, dom_tuples

DEFAULT_BUDGET = 2**20


class QueryError(RelAlgError):
    pass


class WitnessError(RelAlgError):
    pass


class BudgetExhausted(RelAlgError):
    """Raised when exact search runs out of budget before reaching an answer."""

    def __init__(self, examined: int):
        super().__init__(f"budget exhausted after {examined} candidate witnesses")
        self.examined = examined


@dataclass(frozen=True)
class GuessDecl:
    name: str
    arity: int

    def __post_init__(self):
        if self.arity < 1:
            raise QueryError(f"guessed relation {self.name} needs arity >= 1")


@dataclass(frozen=True)
class NpAlgQuery:
    guesses: tuple[GuessDecl, ...]
    fail: Expr
    lets: tuple[tuple[str, Expr], ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "guesses", tuple(self.guesses))
        object.__setattr__(self, "lets", tuple((n, e) for n, e in self.lets))
        names = [g.name for g in self.guesses]
        if len(set(names)) != len(names):
            raise QueryError(f"duplicate guessed relation in {names}")
        declared = set(names)
        bound: set[str] = set()
        for lname, lexpr in self.lets:
            self._check_refs(lexpr, declared, bound)
            bound.add(lname)
        self._check_refs(self.fail, declared, bound)

    @staticmethod
    def _check_refs(expr: Expr, declared: set, bound: set):
        local = set(bound)
        for node in walk(expr):
            if isinstance(node, GuessedRel) and node.name not in declared:
                raise QueryError(f"guessed relation {node.name!r} is not declared")
            if isinstance(node, Let):
                local.add(node.name)
            if isinstance(node, Ref) and node.name not in local:
                raise QueryError(f"reference to undefined intermediate {node.name!r}")

    @property
    def arities(self) -> dict[str, int]:
        return {g.name: g.arity for g in self.guesses}

    def expr(self) -> Expr:
        """FAIL with every intermediate folded in as a ``Let``."""
        body = self.fail
        for lname, lexpr in reversed(self.lets):
            body = Let(lname, lexpr, body)
        return body

    def base_names(self) -> set[str]:
        return {n.name for n in walk(self.expr()) if isinstance(n, BaseRel)}

    def validate(self, db: Database) -> None:
        clash = {g.name for g in self.guesses} & set(db.relations)
        if clash:
            raise QueryError(f"guessed relations clash with base relations: {sorted(clash)}")
        base = {n: r.arity for n, r in db.relations.items()}
        infer_arity(self.expr(), base, self.arities)


Witness = dict  # guessed name -> Relation


def witness_from(query: NpAlgQuery, tuples: Mapping[str, Iterable[Sequence[Constant]]]) -> Witness:
    out = {}
    for g in query.guesses:
        out[g.name] = Relation.unnamed(g.arity, (tuple(t) for t in tuples.get(g.name, ())))
    return out


def _validate_witness(query: NpAlgQuery, db: Database, w: Mapping[str, Relation]) -> None:
    dom = set(db.dom_values())
    for g in query.guesses:
        if g.name not in w:
            raise WitnessError(f"witness lacks guessed relation {g.name!r}")
        rel = w[g.name]
        if rel.arity != g.arity:
            raise WitnessError(f"{g.name} has arity {rel.arity}, declared {g.arity}")
        for t in rel.tuples:
            if not all(v in dom for v in t):
                raise WitnessError(f"{g.name} tuple {t!r} leaves the active domain")


def fail_relation(query: NpAlgQuery, db: Database, w: Mapping[str, Relation]) -> Relation:
    return Evaluator(db, w)(query.expr())


def check(query: NpAlgQuery, db: Database, w: Mapping[str, Relation]) -> bool:
    """True iff FAIL evaluates to the empty relation under witness ``w``."""
    _validate_witness(query, db, w)
    return not fail_relation(query, db, w)


def found_expr(query: NpAlgQuery) -> Expr:
    """FOUND = DOM − π$1(DOM × FAIL): nonempty exactly when FAIL is empty."""
    return Difference(DomPower(1), Project(Product(DomPower(1), query.expr()), ("$1",)))


def count_extensions(decl: GuessDecl, db: Database) -> int:
    n = len(db.dom_values()) ** decl.arity
    if n > 20:
        raise OverflowError(f"|DOM|^{decl.arity} = {n} candidate tuples; refusing to count 2^{n}")
    return 2**n


# ------------------------------------------------------------- enumeration


@dataclass
class _Space:
    names: list[str]
    arities: list[int]
    candidates: list[list[tuple]]  # sorted DOM^a per guess
    fixed: dict[str, Relation]

    @property
    def radices(self) -> list[int]:
        return [1 << len(c) for c in self.candidates]

    @property
    def size(self) -> int:
        out = 1
        for r in self.radices:
            out *= r
        return out

    def witness(self, masks: Sequence[int]) -> Witness:
        w = dict(self.fixed)
        for name, arity, cands, mask in zip(self.names, self.arities, self.candidates, masks):
            w[name] = Relation.unnamed(arity, frozenset(t for j, t in enumerate(cands) if mask >> j & 1))
        return w

    def masks_at(self, index: int) -> list[int]:
        out = []
        for r in reversed(self.radices):
            out.append(index % r)
            index //= r
        return out[::-1]


def _space(query: NpAlgQuery, db: Database, fixed: Mapping[str, Relation] | None) -> _Space:
    fixed = dict(fixed or {})
    dom = db.dom_values()
    space = _Space([], [], [], fixed)
    for g in query.guesses:
        if g.name in fixed:
            continue
        space.names.append(g.name)
        space.arities.append(g.arity)
        space.candidates.append(list(dom_tuples(dom, g.arity)) if dom else [])
    return space


def _odometer(radices: Sequence[int]) -> Iterator[list[int]]:
    """Mask vectors in index order, last position fastest; lazy for huge radices."""
    masks = [0] * len(radices)
    while True:
        yield list(masks)
        i = len(masks) - 1
        while i >= 0:
            masks[i] += 1
            if masks[i] < radices[i]:
                break
            masks[i] = 0
            i -= 1
        if i < 0:
            return


def iter_witnesses(
    query: NpAlgQuery, db: Database, fixed: Mapping[str, Relation] | None = None
) -> Iterator[Witness]:
    """All candidate extensions in odometer order (last guess varies fastest)."""
    space = _space(query, db, fixed)
    for masks in _odometer(space.radices):
        yield space.witness(masks)


def count_candidates(query: NpAlgQuery, db: Database, fixed: Mapping[str, Relation] | None = None) -> int:
    return _space(query, db, fixed).size


@dataclass
class ExactResult:
    witness: Witness | None
    examined: int
    index: int | None = None

    @property
    def answer(self) -> bool:
        return self.witness is not None


def search_exact(
    query: NpAlgQuery,
    db: Database,
    budget: int | None = DEFAULT_BUDGET,
    fixed: Mapping[str, Relation] | None = None,
    workers: int = 1,
) -> ExactResult:
    """Enumerate extensions until FAIL is empty; report how many were examined.

    With several workers the index space is scanned in consecutive chunks and
    the lowest-index solution wins, so the result matches a serial scan.
    """
    query.validate(db)
    space = _space(query, db, fixed)
    expr = query.expr()
    total = space.size
    limit = total if budget is None else min(total, budget)

    def scan(lo: int, hi: int) -> tuple[int | None, Witness | None]:
        for idx in range(lo, hi):
            w = space.witness(space.masks_at(idx))
            if not Evaluator(db, w)(expr):
                return idx, w
        return None, None

    if workers <= 1:
        for idx, masks in enumerate(_odometer(space.radices)):
            if idx >= limit:
                break
            w = space.witness(masks)
            if not Evaluator(db, w)(expr):
                return ExactResult(w, idx + 1, idx)
    else:
        chunk = max(1, min(4096, limit // (workers * 4) or 1))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            lo = 0
            while lo < limit:
                bounds = []
                for _ in range(workers):
                    if lo >= limit:
                        break
                    bounds.append((lo, min(limit, lo + chunk)))
                    lo += chunk
                for idx, w in pool.map(lambda b: scan(*b), bounds):
                    if idx is not None:
                        return ExactResult(w, idx + 1, idx)
    if limit < total:
        raise BudgetExhausted(limit)
    return ExactResult(None, total)


def solve_exact(
    query: NpAlgQuery,
    db: Database,
    budget: int | None = DEFAULT_BUDGET,
    fixed: Mapping[str, Relation] | None = None,
    workers: int = 1,
) -> Witness | None:
    """Return a witness making FAIL empty, or None when none exists."""
    return search_exact(query, db, budget, fixed, workers).witness


def all_solutions(query: NpAlgQuery, db: Database, fixed: Mapping[str, Relation] | None = None) -> list[Witness]:
    expr = query.expr()
    return [w for w in iter_witnesses(query, db, fixed) if not Evaluator(db, w)(expr)]
