"""Recognising the two polynomial query shapes and deciding them through 2SAT.

Eaa:        one guess Q^(s);  FAIL = DOM×DOM − π_{Y1,Y2}(PHI)
E1eStarAa:  one guess Q^(1);  X = PHI / ρ(DOM×DOM);  FAIL = empty(X)

PHI must be q-free and mention only base relations and Q.  Grounding is done
by evaluating PHI symbolically: every tuple carries a small boolean function
of the "tuple u is in Q" variables.  A grounded condition is turned into
clauses only after checking, by truth table, that it equals the conjunction
of its implied clauses of width at most two.  Anything else is reported as
not being in the fragment, so no unsound instance is ever produced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .algebra import (
    Difference,
    Divide,
    DomPower,
    Expr,
    GuessedRel,
    Intersect,
    Join,
    Let,
    Product,
    Project,
    Ref,
    Rename,
    Select,
    SymDiff,
    Union_,
    compile_join_pred,
    compile_pred,
    conj,
    walk,
    _split_join,
)
from .engine import NpAlgQuery, Witness, check
from .relation import Database, Relation, RelAlgError, dom_tuples, qualify, resolve_attr
from .twosat import TwoSatInstance, solve_2sat

MAX_CLAUSE_VARS = 10


class NotInFragment(RelAlgError):
    pass


@dataclass(frozen=True)
class FragmentClass:
    tag: str  # "Eaa", "E1eStarAa" or "General"
    guess: str | None = None
    arity: int | None = None
    phi: Expr | None = None
    y_attrs: tuple | None = None  # Eaa projection list, None when PHI is binary
    reason: str = ""

    def describe(self) -> dict:
        out = {"tag": self.tag}
        if self.guess is not None:
            out["guess"] = self.guess
            out["arity"] = self.arity
        if self.y_attrs is not None:
            out["projection"] = list(self.y_attrs)
        if self.reason:
            out["reason"] = self.reason
        return out


# ------------------------------------------------------------ classification


def inline_lets(expr: Expr, env: Mapping[str, Expr] | None = None) -> Expr:
    env = dict(env or {})
    if isinstance(expr, Ref):
        if expr.name not in env:
            raise RelAlgError(f"unbound intermediate relation {expr.name!r}")
        return env[expr.name]
    if isinstance(expr, Let):
        inner = dict(env)
        inner[expr.name] = inline_lets(expr.value, env)
        return inline_lets(expr.body, inner)
    if isinstance(expr, (Select,)):
        return Select(inline_lets(expr.child, env), expr.pred)
    if isinstance(expr, Project):
        return Project(inline_lets(expr.child, env), expr.attrs, expr.implicit)
    if isinstance(expr, Rename):
        return Rename(inline_lets(expr.child, env), expr.mapping)
    if isinstance(expr, Join):
        return Join(inline_lets(expr.left, env), inline_lets(expr.right, env), expr.cond)
    if isinstance(expr, (Product, Union_, Difference, Intersect, SymDiff, Divide)):
        return type(expr)(inline_lets(expr.left, env), inline_lets(expr.right, env))
    return expr


def _is_dom_square(e: Expr) -> bool:
    while isinstance(e, Rename):
        e = e.child
    if isinstance(e, DomPower):
        return e.k == 2
    return (
        isinstance(e, Product)
        and isinstance(e.left, DomPower)
        and isinstance(e.right, DomPower)
        and e.left.k == 1
        and e.right.k == 1
    )


def _is_empty_of(e: Expr) -> Expr | None:
    """Return r when e is DOM − π$1(DOM × r)."""
    if not (isinstance(e, Difference) and isinstance(e.left, DomPower) and e.left.k == 1):
        return None
    p = e.right
    if not (isinstance(p, Project) and p.attrs == ("$1",) and isinstance(p.child, Product)):
        return None
    if not (isinstance(p.child.left, DomPower) and p.child.left.k == 1):
        return None
    return p.child.right


def _qfree_problem(phi: Expr, guess: str) -> str:
    for node in walk(phi):
        if isinstance(node, Project) and not node.implicit:
            return "PHI contains an explicit projection"
        if isinstance(node, Divide):
            return "PHI contains a division"
        if isinstance(node, GuessedRel) and node.name != guess:
            return f"PHI mentions another guessed relation {node.name}"
        if isinstance(node, (Ref, Let)):
            return "PHI has unresolved intermediates"
    return ""


def classify(query: NpAlgQuery) -> FragmentClass:
    if len(query.guesses) != 1:
        return FragmentClass("General", reason=f"{len(query.guesses)} guessed relations, the fragments admit one")
    g = query.guesses[0]
    try:
        fail = inline_lets(query.expr())
    except RelAlgError as exc:
        return FragmentClass("General", reason=str(exc))

    if isinstance(fail, Difference) and _is_dom_square(fail.left):
        rhs = fail.right
        y_attrs = None
        if isinstance(rhs, Project) and not rhs.implicit:
            if len(rhs.attrs) != 2:
                return FragmentClass("General", reason="projection must keep two attributes")
            y_attrs, phi = tuple(rhs.attrs), rhs.child
        else:
            phi = rhs
        why = _qfree_problem(phi, g.name)
        if why:
            return FragmentClass("General", reason=why)
        return FragmentClass("Eaa", g.name, g.arity, phi, y_attrs)

    x = _is_empty_of(fail)
    if x is not None and isinstance(x, Divide) and _is_dom_square(x.right):
        if g.arity != 1:
            return FragmentClass("General", reason="the E1e*aa shape needs a unary guess")
        why = _qfree_problem(x.left, g.name)
        if why:
            return FragmentClass("General", reason=why)
        return FragmentClass("E1eStarAa", g.name, 1, x.left)

    return FragmentClass("General", reason="FAIL matches neither polynomial shape")


# ------------------------------------------------------ small boolean functions


class BF:
    """A boolean function given by its truth table over a sorted variable list.

    Bit ``i`` of ``table`` is the value under the assignment whose j-th
    variable takes bit j of ``i``.
    """

    __slots__ = ("vars", "table")

    def __init__(self, vars: tuple, table: int):
        self.vars = vars
        self.table = table

    @property
    def is_true(self) -> bool:
        return self.table == (1 << (1 << len(self.vars))) - 1

    @property
    def is_false(self) -> bool:
        return self.table == 0

    def __repr__(self):
        return f"BF({self.vars}, {self.table:b})"


TRUE = BF((), 1)
FALSE = BF((), 0)
_EXPAND_CACHE: dict = {}


def bf_var(v: int) -> BF:
    return BF((v,), 0b10)


def _expand(f: BF, target: tuple) -> int:
    if f.vars == target:
        return f.table
    key = (f.vars, target)
    mapping = _EXPAND_CACHE.get(key)
    if mapping is None:
        pos = [target.index(v) for v in f.vars]
        mapping = []
        for idx in range(1 << len(target)):
            sub = 0
            for j, p in enumerate(pos):
                sub |= ((idx >> p) & 1) << j
            mapping.append(sub)
        _EXPAND_CACHE[key] = mapping
    out = 0
    t = f.table
    for idx, sub in enumerate(mapping):
        if t >> sub & 1:
            out |= 1 << idx
    return out


def _merge(f: BF, g: BF) -> tuple:
    if f.vars == g.vars:
        return f.vars
    merged = tuple(sorted(set(f.vars) | set(g.vars)))
    if len(merged) > MAX_CLAUSE_VARS:
        raise NotInFragment(f"a grounded condition depends on {len(merged)} guessed tuples")
    return merged


def bf_and(f: BF, g: BF) -> BF:
    if f.is_false or g.is_true:
        return f
    if g.is_false or f.is_true:
        return g
    vs = _merge(f, g)
    return _simplify(BF(vs, _expand(f, vs) & _expand(g, vs)))


def bf_or(f: BF, g: BF) -> BF:
    if f.is_true or g.is_false:
        return f
    if g.is_true or f.is_false:
        return g
    vs = _merge(f, g)
    return _simplify(BF(vs, _expand(f, vs) | _expand(g, vs)))


def bf_not(f: BF) -> BF:
    return BF(f.vars, f.table ^ ((1 << (1 << len(f.vars))) - 1))


def bf_xor(f: BF, g: BF) -> BF:
    return bf_or(bf_and(f, bf_not(g)), bf_and(bf_not(f), g))


def _simplify(f: BF) -> BF:
    if f.is_true:
        return TRUE
    if f.is_false:
        return FALSE
    return f


def bf_eval(f: BF, assignment: Mapping[int, bool]) -> bool:
    idx = 0
    for j, v in enumerate(f.vars):
        if assignment[v]:
            idx |= 1 << j
    return bool(f.table >> idx & 1)


def two_cnf(f: BF) -> list[tuple] | None:
    """Clauses of width <= 2 equivalent to f, or None when no such set exists."""
    if f.is_true:
        return []
    vs = f.vars
    m = len(vs)
    models = [i for i in range(1 << m) if f.table >> i & 1]
    lits = [(j, pos) for j in range(m) for pos in (True, False)]

    def implied(clause) -> bool:
        return all(any(((i >> j) & 1) == pos for j, pos in clause) for i in models)

    clauses = []
    for a in range(len(lits)):
        for b in range(a, len(lits)):
            clause = (lits[a],) if a == b else (lits[a], lits[b])
            if implied(clause):
                clauses.append(clause)
    table = 0
    for i in range(1 << m):
        if all(any(((i >> j) & 1) == pos for j, pos in c) for c in clauses):
            table |= 1 << i
    if table != f.table:
        return None
    out = []
    for c in clauses:
        a = (vs[c[0][0]], c[0][1])
        b = (vs[c[-1][0]], c[-1][1])
        out.append((a, b))
    return out


# ------------------------------------------------------- symbolic evaluation


@dataclass
class SymRel:
    schema: tuple
    rows: dict = field(default_factory=dict)  # tuple -> BF (absent means False)


class SymbolicEvaluator:
    """Evaluates a q-free expression with Q's tuples left as variables."""

    def __init__(self, db: Database, guess: str, arity: int):
        self.db = db
        self.guess = guess
        self.dom = db.dom_values()
        self.candidates = list(dom_tuples(self.dom, arity)) if self.dom else []
        self.var_of = {t: i for i, t in enumerate(self.candidates)}

    def __call__(self, e: Expr) -> SymRel:
        method = getattr(self, "_" + type(e).__name__, None)
        if method is None:
            raise NotInFragment(f"cannot ground {type(e).__name__}")
        return method(e)

    def _BaseRel(self, e):
        rel = self.db[e.name]
        alias = e.alias or e.name
        return SymRel(tuple(qualify(alias, a) for a in rel.schema), {t: TRUE for t in rel.tuples})

    def _GuessedRel(self, e):
        if e.name != self.guess:
            raise NotInFragment(f"unexpected guessed relation {e.name}")
        alias = e.alias or e.name
        arity = len(self.candidates[0]) if self.candidates else 0
        schema = tuple(qualify(alias, "") for _ in range(arity))
        return SymRel(schema, {t: bf_var(i) for t, i in self.var_of.items()})

    def _DomPower(self, e):
        return SymRel(("DOM",) * e.k, {t: TRUE for t in dom_tuples(self.dom, e.k)})

    def _Literal(self, e):
        return SymRel(e.relation.schema, {t: TRUE for t in e.relation.tuples})

    def _Select(self, e):
        r = self(e.child)
        test = compile_pred(e.pred, r.schema)
        return SymRel(r.schema, {t: f for t, f in r.rows.items() if test(t)})

    def _Project(self, e):
        r = self(e.child)
        idx = [resolve_attr(r.schema, a) for a in e.attrs]
        out: dict = {}
        for t, f in r.rows.items():
            key = tuple(t[i] for i in idx)
            out[key] = bf_or(out[key], f) if key in out else f
        return SymRel(tuple(r.schema[i] for i in idx), out)

    def _Rename(self, e):
        r = self(e.child)
        names = list(r.schema)
        for ref, new in e.mapping:
            names[resolve_attr(r.schema, ref)] = new
        return SymRel(tuple(names), r.rows)

    def _Product(self, e):
        a, b = self(e.left), self(e.right)
        out = {}
        for x, f in a.rows.items():
            for y, g in b.rows.items():
                h = bf_and(f, g)
                if not h.is_false:
                    out[x + y] = h
        return SymRel(a.schema + b.schema, out)

    def _Union_(self, e):
        a, b = self(e.left), self(e.right)
        out = dict(a.rows)
        for t, g in b.rows.items():
            out[t] = bf_or(out[t], g) if t in out else g
        return SymRel(a.schema, out)

    def _Difference(self, e):
        a, b = self(e.left), self(e.right)
        out = {}
        for t, f in a.rows.items():
            h = bf_and(f, bf_not(b.rows[t])) if t in b.rows else f
            if not h.is_false:
                out[t] = h
        schema = b.schema if isinstance(e.left, DomPower) else a.schema
        return SymRel(schema, out)

    def _Intersect(self, e):
        a, b = self(e.left), self(e.right)
        out = {}
        for t, f in a.rows.items():
            if t in b.rows:
                h = bf_and(f, b.rows[t])
                if not h.is_false:
                    out[t] = h
        return SymRel(a.schema, out)

    def _SymDiff(self, e):
        a, b = self(e.left), self(e.right)
        out = {}
        for t in set(a.rows) | set(b.rows):
            h = bf_xor(a.rows.get(t, FALSE), b.rows.get(t, FALSE))
            if not h.is_false:
                out[t] = h
        return SymRel(a.schema, out)

    def _Join(self, e):
        a, b = self(e.left), self(e.right)
        out = {}
        if e.cond is None:
            common = [n for n in a.schema if n and n in b.schema]
            li = [a.schema.index(n) for n in common]
            ri = [b.schema.index(n) for n in common]
            keep = [j for j in range(len(b.schema)) if j not in ri]
            schema = a.schema + tuple(b.schema[j] for j in keep)
            for x, f in a.rows.items():
                for y, g in b.rows.items():
                    if all(x[i] == y[j] for i, j in zip(li, ri)):
                        h = bf_and(f, g)
                        if not h.is_false:
                            out[x + tuple(y[j] for j in keep)] = h
            return SymRel(schema, out)
        keys, rest = _split_join(e.cond, a.schema, b.schema)
        test = compile_join_pred(conj(*rest), a.schema, b.schema) if rest else None
        for x, f in a.rows.items():
            for y, g in b.rows.items():
                if all(x[i] == y[j] for i, j in keys) and (test is None or test(x, y)):
                    h = bf_and(f, g)
                    if not h.is_false:
                        out[x + y] = h
        return SymRel(a.schema + b.schema, out)


# ------------------------------------------------------------------ 2SAT side


@dataclass
class Grounding:
    instance: TwoSatInstance
    candidates: list  # variable index -> guessed tuple
    guess: str
    arity: int


def _clauses_for(conditions, n_vars: int) -> list:
    clauses: list = []
    seen = set()
    for f in conditions:
        if f.is_true:
            continue
        if f.is_false:
            if n_vars == 0:
                raise NotInFragment("unsatisfiable ground condition with no variables")
            clauses += [((0, True), (0, True)), ((0, False), (0, False))]
            continue
        cnf = two_cnf(f)
        if cnf is None:
            raise NotInFragment(f"a grounded condition over {len(f.vars)} guessed tuples is not 2-CNF")
        for c in cnf:
            if c not in seen:
                seen.add(c)
                clauses.append(c)
    return clauses


def _ground_eaa(fc: FragmentClass, db: Database) -> Grounding:
    sym = SymbolicEvaluator(db, fc.guess, fc.arity)
    phi = sym(fc.phi)
    if fc.y_attrs is not None:
        idx = [resolve_attr(phi.schema, a) for a in fc.y_attrs]
    else:
        if len(phi.schema) != 2:
            raise NotInFragment(f"PHI has arity {len(phi.schema)}, expected 2")
        idx = [0, 1]
    member: dict = {}
    for t, f in phi.rows.items():
        key = (t[idx[0]], t[idx[1]])
        member[key] = bf_or(member[key], f) if key in member else f
    conds = [member.get(pair, FALSE) for pair in dom_tuples(sym.dom, 2)] if sym.dom else []
    inst = TwoSatInstance(len(sym.candidates), tuple(_clauses_for(conds, len(sym.candidates))))
    return Grounding(inst, sym.candidates, fc.guess, fc.arity)


def _groundings_e1e(fc: FragmentClass, db: Database):
    sym = SymbolicEvaluator(db, fc.guess, 1)
    phi = sym(fc.phi)
    k = len(phi.schema) - 2
    if k < 1:
        raise NotInFragment("PHI needs at least one column besides Y1, Y2")
    by_x: dict = {}
    for t, f in phi.rows.items():
        by_x.setdefault(t[:k], {})[t[k:]] = f
    pairs = list(dom_tuples(sym.dom, 2)) if sym.dom else []
    for x in dom_tuples(sym.dom, k) if sym.dom else ():
        rows = by_x.get(x, {})
        conds = [rows.get(p, FALSE) for p in pairs]
        if any(c.is_false for c in conds):
            continue
        inst = TwoSatInstance(len(sym.candidates), tuple(_clauses_for(conds, len(sym.candidates))))
        yield x, Grounding(inst, sym.candidates, fc.guess, 1)


def to_2sat(query: NpAlgQuery, db: Database, exists: tuple | None = None) -> TwoSatInstance:
    """The 2SAT instance for an Eaa query, or for one binding of X in E1e*aa."""
    fc = classify(query)
    if fc.tag == "Eaa":
        return _ground_eaa(fc, db).instance
    if fc.tag == "E1eStarAa":
        sym = SymbolicEvaluator(db, fc.guess, 1)
        phi = sym(fc.phi)
        k = len(phi.schema) - 2
        if exists is None or len(exists) != k:
            raise NotInFragment(f"an E1e*aa query needs a binding for its {k} leading columns")
        pairs = list(dom_tuples(sym.dom, 2)) if sym.dom else []
        conds = [phi.rows.get(tuple(exists) + p, FALSE) for p in pairs]
        return TwoSatInstance(len(sym.candidates), tuple(_clauses_for(conds, len(sym.candidates))))
    raise NotInFragment(f"query is not in a polynomial fragment: {fc.reason}")


@dataclass
class PolyResult:
    answer: bool
    witness: Witness | None
    fragment: str
    binding: tuple | None = None


def _witness(g: Grounding, assignment) -> Witness:
    rows = [t for t, v in zip(g.candidates, assignment) if v]
    return {g.guess: Relation.unnamed(g.arity, rows)}


def solve_poly(query: NpAlgQuery, db: Database) -> PolyResult:
    """Decide an Eaa or E1e*aa query in polynomial time; the witness is re-checked."""
    query.validate(db)
    fc = classify(query)
    if fc.tag == "Eaa":
        g = _ground_eaa(fc, db)
        sol = solve_2sat(g.instance)
        if sol is None:
            return PolyResult(False, None, fc.tag)
        w = _witness(g, sol)
        if not check(query, db, w):
            raise RelAlgError("2SAT witness failed verification")
        return PolyResult(True, w, fc.tag)
    if fc.tag == "E1eStarAa":
        for x, g in _groundings_e1e(fc, db):
            sol = solve_2sat(g.instance)
            if sol is not None:
                w = _witness(g, sol)
                if not check(query, db, w):
                    raise RelAlgError("2SAT witness failed verification")
                return PolyResult(True, w, fc.tag, x)
        return PolyResult(False, None, fc.tag)
    raise NotInFragment(f"query is not in a polynomial fragment: {fc.reason}")

