"""Builders for the derived "fail" expressions used to state constraints.

Every builder is a pure rewrite: it returns an expression over the names it
was given and never evaluates anything.  Unless stated otherwise the result
has arity 1 and is empty exactly when the named property holds.  Builders
that quantify over an auxiliary guessed relation take its name; the caller
must declare it in the query's guess list with the arity given in the
docstring.
"""
from __future__ import annotations

from typing import Sequence

from .algebra import (
    C,
    Difference,
    DomPower,
    Expr,
    GuessedRel,
    Intersect,
    Join,
    Product,
    Project,
    Select,
    SymDiff,
    Union_,
    conj,
    disj,
    union_all,
)
from .relation import ArityError


def _cols(start: int, n: int) -> tuple[str, ...]:
    return tuple(f"${i}" for i in range(start, start + n))


def _first(expr: Expr) -> Expr:
    return Project(expr, ("$1",))


def build_complement(r: Expr, k: int) -> Expr:
    """Active complement DOM^k − r; the result keeps r's column names."""
    if k < 1:
        raise ArityError(f"complement needs arity >= 1, got {k}")
    return Difference(DomPower(k), r)


def build_empty(r: Expr) -> Expr:
    """DOM − π$1(DOM × r): empty iff r is nonempty (given DOM nonempty)."""
    return Difference(DomPower(1), Project(Product(DomPower(1), r), ("$1",)))


def build_fail_partition(n: Expr, parts: Sequence[Expr], k: int = 1) -> Expr:
    """Empty iff ``parts`` are pairwise disjoint and their union equals ``n``."""
    if not parts:
        raise ArityError("a partition needs at least one part")
    if k < 1:
        raise ArityError(f"arity must be >= 1, got {k}")
    failures: list[Expr] = []
    for i in range(len(parts)):
        for j in range(len(parts)):
            if i != j:
                failures.append(_first(Intersect(parts[i], parts[j])))
    failures.append(_first(SymDiff(n, union_all(list(parts)))))
    return union_all(failures)


# -- functions ---------------------------------------------------------------


def _domain_part(d: int) -> tuple[str, ...]:
    return _cols(1, d)


def _range_part(d: int, r: int) -> tuple[str, ...]:
    return _cols(d + 1, r)


def fail_function(fun: Expr, d_rel: Expr, r_rel: Expr, d: int = 1, r: int = 1) -> Expr:
    """Empty iff fun ⊆ D × R and fun is mono-valued."""
    outside_d = Difference(Project(fun, _domain_part(d)), d_rel)
    outside_r = Difference(Project(fun, _range_part(d, r)), r_rel)
    same_arg = [C(c, "=", c) for c in _domain_part(d)]
    other_val = [C(c, "!=", c) for c in _range_part(d, r)]
    multi = Join(fun, fun, conj(*same_arg, disj(*other_val)))
    return union_all([_first(outside_d), _first(outside_r), _first(multi)])


def fail_total(fun: Expr, d_rel: Expr, r_rel: Expr, d: int = 1, r: int = 1) -> Expr:
    return _first(Difference(d_rel, Project(fun, _domain_part(d))))


def fail_surjective(fun: Expr, d_rel: Expr, r_rel: Expr, d: int = 1, r: int = 1) -> Expr:
    return _first(Difference(r_rel, Project(fun, _range_part(d, r))))


def fail_injective(fun: Expr, d_rel: Expr, r_rel: Expr, d: int = 1, r: int = 1) -> Expr:
    other_arg = [C(c, "!=", c) for c in _domain_part(d)]
    same_val = [C(c, "=", c) for c in _range_part(d, r)]
    return _first(Join(fun, fun, conj(disj(*other_arg), *same_val)))


_FUNCTION_FAMILY = {
    "Function": fail_function,
    "Total": fail_total,
    "Surjective": fail_surjective,
    "Injective": fail_injective,
}


def build_fail_function_family(
    kind: str, fun: Expr, d_rel: Expr, r_rel: Expr, d: int = 1, r: int = 1
) -> Expr:
    """``kind`` is one of Function, Total, Injective, Surjective."""
    try:
        builder = _FUNCTION_FAMILY[kind]
    except KeyError:
        raise ValueError(f"unknown function constraint {kind!r}") from None
    if d < 1 or r < 1:
        raise ArityError("domain and range arities must be >= 1")
    return builder(fun, d_rel, r_rel, d, r)


# -- cardinality ---------------------------------------------------------------


def fail_geq_size(aux: str, n: Expr, k: Expr, dn: int = 1, dk: int = 1) -> Expr:
    """|n| >= |k| iff some AUX (arity dn+dk) is a partial surjection n → k."""
    f = GuessedRel(aux)
    return Union_(fail_function(f, n, k, dn, dk), fail_surjective(f, n, k, dn, dk))


def fail_leq_size(aux: str, n: Expr, k: Expr, dn: int = 1, dk: int = 1) -> Expr:
    """|n| <= |k|; AUX (arity dk+dn) is read as a partial surjection k → n."""
    return fail_geq_size(aux, k, n, dk, dn)


def fail_eq_size(aux: str, n: Expr, k: Expr, dn: int = 1, dk: int = 1) -> Expr:
    """|n| = |k| iff some AUX (arity dn+dk) is a total bijection n → k."""
    f = GuessedRel(aux)
    return union_all(
        [
            fail_function(f, n, k, dn, dk),
            fail_total(f, n, k, dn, dk),
            fail_injective(f, n, k, dn, dk),
            fail_surjective(f, n, k, dn, dk),
        ]
    )


_SIZE = {"Geq": fail_geq_size, "Leq": fail_leq_size, "Eq": fail_eq_size}


def build_fail_size_cmp(kind: str, aux: str, n: Expr, k: Expr, dn: int = 1, dk: int = 1) -> Expr:
    """``kind`` is Geq, Leq or Eq; the result is empty for some AUX iff the size relation holds."""
    try:
        builder = _SIZE[kind]
    except KeyError:
        raise ValueError(f"unknown size comparison {kind!r}") from None
    if not aux:
        raise ValueError("size comparison needs an auxiliary guessed relation name")
    return builder(aux, n, k, dn, dk)


# -- orderings -----------------------------------------------------------------


def build_fail_permutation(perm: Expr, n: Expr, k: int = 1) -> Expr:
    """Empty iff perm (arity 2k) is a bijection from n onto n."""
    return union_all(
        [
            fail_function(perm, n, n, k, k),
            fail_total(perm, n, n, k, k),
            fail_injective(perm, n, n, k, k),
            fail_surjective(perm, n, n, k, k),
        ]
    )


def compose(a: Expr, b: Expr, k: int) -> Expr:
    """{(x, z) : (x, y) ∈ a, (y, z) ∈ b} for k-column elements."""
    cond = conj(*(C(f"${k + i}", "=", f"${i}") for i in range(1, k + 1)))
    return Project(Join(a, b, cond), _cols(1, k) + _cols(3 * k + 1, k))


def build_fail_successor(succ: Expr, n: Expr, closure: str, k: int = 1) -> Expr:
    """Empty for some CLOSURE iff succ (arity 2k) orders n as a single chain.

    ``closure`` names an auxiliary guessed relation of arity 2k that must
    contain succ, be transitive and irreflexive; such a relation exists iff
    succ is acyclic.  The remaining conditions ask succ to be a partial
    injective function on n with at most one element lacking a predecessor,
    which together make succ a Hamiltonian path over n.
    """
    if k < 1:
        raise ArityError(f"arity must be >= 1, got {k}")
    clos = GuessedRel(closure)
    second_half = _cols(k + 1, k)
    not_in_closure = _first(Difference(succ, clos))
    not_transitive = _first(Difference(compose(clos, clos, k), clos))
    reflexive = _first(Select(clos, conj(*(C(f"${i}", "=", f"${k + i}") for i in range(1, k + 1)))))
    starts = Difference(n, Project(succ, second_half))
    distinct = disj(*(C(f"${i}", "!=", f"${k + i}") for i in range(1, k + 1)))
    two_starts = _first(Select(Product(starts, starts), distinct))
    return union_all(
        [
            fail_function(succ, n, n, k, k),
            fail_injective(succ, n, n, k, k),
            not_in_closure,
            not_transitive,
            reflexive,
            two_starts,
        ]
    )
