"""Quantifier-free first-order formulas to algebra, and ESO sentences to queries.

``translate_fo`` produces a q-free expression whose columns are the formula's
free variables in sorted order.  A tuple belongs to the result exactly when
the corresponding assignment satisfies the formula over the active domain.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .algebra import (
    C,
    Difference,
    DomPower,
    Expr,
    GuessedRel,
    BaseRel,
    Join,
    Product,
    Project,
    Select,
    Union_,
    Val,
    conj,
    rename_all,
    walk,
)
from .engine import GuessDecl, NpAlgQuery
from .relation import Constant, Database, RelAlgError
from .sugar import build_empty


class TranslationError(RelAlgError):
    pass


# ------------------------------------------------------------------ formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: Constant


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class FAnd:
    left: object
    right: object


@dataclass(frozen=True)
class FOr:
    left: object
    right: object


@dataclass(frozen=True)
class FNot:
    item: object


FoFormula = Union[Atom, Eq, FAnd, FOr, FNot]


def atom(pred: str, *args) -> Atom:
    return Atom(pred, tuple(a if isinstance(a, (Var, Const)) else _term(a) for a in args))


def _term(x) -> Term:
    if isinstance(x, str):
        return Var(x)
    return Const(x)


def free_vars(phi: FoFormula) -> set[str]:
    if isinstance(phi, Atom):
        return {a.name for a in phi.args if isinstance(a, Var)}
    if isinstance(phi, Eq):
        return {a.name for a in (phi.left, phi.right) if isinstance(a, Var)}
    if isinstance(phi, (FAnd, FOr)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, FNot):
        return free_vars(phi.item)
    raise TranslationError(f"not a quantifier-free formula: {phi!r}")


def holds(phi: FoFormula, relations: Mapping[str, set], nu: Mapping[str, Constant]) -> bool:
    """Direct model checking of ``phi`` under assignment ``nu``."""

    def val(t: Term):
        return nu[t.name] if isinstance(t, Var) else t.value

    if isinstance(phi, Atom):
        return tuple(val(a) for a in phi.args) in relations[phi.pred]
    if isinstance(phi, Eq):
        return val(phi.left) == val(phi.right)
    if isinstance(phi, FAnd):
        return holds(phi.left, relations, nu) and holds(phi.right, relations, nu)
    if isinstance(phi, FOr):
        return holds(phi.left, relations, nu) or holds(phi.right, relations, nu)
    if isinstance(phi, FNot):
        return not holds(phi.item, relations, nu)
    raise TranslationError(f"not a quantifier-free formula: {phi!r}")


# --------------------------------------------------------------- translation


def _reorder(expr: Expr, have: Sequence[str], want: Sequence[str]) -> tuple[Expr, tuple[str, ...]]:
    want = tuple(want)
    if tuple(have) == want:
        return expr, want
    return Project(expr, want, implicit=True), want


def _translate_atom(phi: Atom, vocab: Mapping[str, int], guessed: set[str]) -> tuple[Expr, tuple[str, ...]]:
    if phi.pred not in vocab:
        raise TranslationError(f"unknown predicate {phi.pred!r}")
    if len(phi.args) != vocab[phi.pred]:
        raise TranslationError(
            f"{phi.pred} has arity {vocab[phi.pred]} but is applied to {len(phi.args)} arguments"
        )
    rel: Expr = GuessedRel(phi.pred) if phi.pred in guessed else BaseRel(phi.pred)
    conds = []
    first_pos: dict[str, int] = {}
    for i, a in enumerate(phi.args, start=1):
        if isinstance(a, Const):
            conds.append(C(f"${i}", "=", Val(a.value)))
        elif a.name in first_pos:
            conds.append(C(f"${first_pos[a.name]}", "=", f"${i}"))
        else:
            first_pos[a.name] = i
    if not first_pos:
        raise TranslationError(f"ground atom {phi.pred} is not supported")
    if conds:
        rel = Select(rel, conj(*conds))
    names = sorted(first_pos)
    keep = tuple(f"${first_pos[n]}" for n in names)
    if keep != tuple(f"${i}" for i in range(1, len(phi.args) + 1)):
        rel = Project(rel, keep, implicit=True)
    return rename_all(rel, names), tuple(names)


def _translate_eq(phi: Eq) -> tuple[Expr, tuple[str, ...]]:
    l, r = phi.left, phi.right
    if isinstance(l, Const) and isinstance(r, Const):
        raise TranslationError("ground equality is not supported")
    if isinstance(l, Const):
        l, r = r, l
    if isinstance(r, Const):
        return rename_all(Select(DomPower(1), C("$1", "=", Val(r.value))), [l.name]), (l.name,)
    if l.name == r.name:
        return rename_all(DomPower(1), [l.name]), (l.name,)
    names = sorted([l.name, r.name])
    return rename_all(Select(DomPower(2), C("$1", "=", "$2")), names), tuple(names)


def _pad(expr: Expr, have: tuple[str, ...], want: Sequence[str]) -> tuple[Expr, tuple[str, ...]]:
    missing = [v for v in want if v not in have]
    if missing:
        expr = Product(expr, rename_all(DomPower(len(missing)), missing))
        have = have + tuple(missing)
    return _reorder(expr, have, sorted(have))


def _translate(phi, vocab, guessed) -> tuple[Expr, tuple[str, ...]]:
    if isinstance(phi, Atom):
        return _translate_atom(phi, vocab, guessed)
    if isinstance(phi, Eq):
        return _translate_eq(phi)
    if isinstance(phi, FAnd):
        f, fv = _translate(phi.left, vocab, guessed)
        g, gv = _translate(phi.right, vocab, guessed)
        joined = Join(f, g)
        have = fv + tuple(v for v in gv if v not in fv)
        return _reorder(joined, have, sorted(have))
    if isinstance(phi, FOr):
        f, fv = _translate(phi.left, vocab, guessed)
        g, gv = _translate(phi.right, vocab, guessed)
        allv = sorted(set(fv) | set(gv))
        f, _ = _pad(f, fv, allv)
        g, _ = _pad(g, gv, allv)
        return Union_(f, g), tuple(allv)
    if isinstance(phi, FNot):
        f, fv = _translate(phi.item, vocab, guessed)
        return rename_all(Difference(DomPower(len(fv)), f), fv), fv
    raise TranslationError(f"not a quantifier-free formula: {phi!r}")


def translate_fo(
    phi: FoFormula, vocab: Mapping[str, int], guessed: Sequence[str] = ()
) -> Expr:
    """Translate ``phi``; predicates named in ``guessed`` become guessed relations."""
    expr, _ = _translate(phi, vocab, set(guessed))
    return expr


def translated_columns(phi: FoFormula) -> tuple[str, ...]:
    return tuple(sorted(free_vars(phi)))


def is_q_free(expr: Expr) -> bool:
    """No projection other than the column bookkeeping of equi-joins."""
    return all(not isinstance(n, Project) or n.implicit for n in walk(expr))


# ----------------------------------------------------------------------- ESO


@dataclass(frozen=True)
class EsoSentence:
    """(∃S)(∀X)(∃Y) matrix, with the matrix quantifier-free."""

    second_order: tuple  # ((name, arity), ...)
    universal: tuple
    existential: tuple
    matrix: FoFormula

    def __post_init__(self):
        extra = free_vars(self.matrix) - set(self.universal) - set(self.existential)
        if extra:
            raise TranslationError(f"matrix mentions unquantified variables {sorted(extra)}")
        if set(self.universal) & set(self.existential):
            raise TranslationError("a variable cannot be both universal and existential")


def build_psi(s: EsoSentence, vocab: Mapping[str, int]) -> NpAlgQuery:
    """Guess one relation per second-order predicate; FAIL = DOM^|X| − π_X(PHI)."""
    so = {name: arity for name, arity in s.second_order}
    clash = set(so) & set(vocab)
    if clash:
        raise TranslationError(f"second-order predicates clash with base relations: {sorted(clash)}")
    full_vocab = dict(vocab)
    full_vocab.update(so)
    phi, cols = _translate(s.matrix, full_vocab, set(so))
    qvars = list(s.universal) + [y for y in s.existential if y not in s.universal]
    if not qvars:
        raise TranslationError("sentence has no first-order variables")
    phi, cols = _pad(phi, cols, qvars)
    guesses = [GuessDecl(n, a) for n, a in s.second_order]
    if s.universal:
        xs = tuple(s.universal)
        fail = Difference(DomPower(len(xs)), Project(phi, xs))
    else:
        fail = build_empty(phi)
    return NpAlgQuery(tuple(guesses), fail)


def eso_holds(s: EsoSentence, db: Database) -> bool:
    """Brute-force model checking of an ESO sentence over ``db``."""
    dom = db.dom_values()
    base = {n: set(r.tuples) for n, r in db.relations.items()}
    spaces = []
    for name, arity in s.second_order:
        cands = list(itertools.product(dom, repeat=arity))
        spaces.append([(name, frozenset(c for j, c in enumerate(cands) if m >> j & 1)) for m in range(1 << len(cands))])
    xs, ys = list(s.universal), list(s.existential)
    for choice in itertools.product(*spaces):
        rels = dict(base)
        rels.update({n: set(ext) for n, ext in choice})
        ok = True
        for xv in itertools.product(dom, repeat=len(xs)):
            nu = dict(zip(xs, xv))
            if not any(
                holds(s.matrix, rels, {**nu, **dict(zip(ys, yv))})
                for yv in itertools.product(dom, repeat=len(ys))
            ):
                ok = False
                break
        if ok:
            return True
    return False
