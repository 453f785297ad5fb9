"""Text formats for NP-Alg queries and ESO sentences, as s-expressions.

Query file::

    (npalg-query "name"
      (guess Q1 1)
      (let X <expr>)          ; optional, any number, in order
      (fail <expr>))

Expressions::

    (base NAME [ALIAS])  (guessed NAME [ALIAS])  (ref NAME)  (dom K)
    (literal ("col" ...) (v ...) ...)
    (select E PRED)  (project E ("attr" ...))  (project-implicit E ("attr" ...))
    (rename E (("old" "new") ...))
    (product A B) (union A B) (difference A B) (intersect A B)
    (symdiff A B) (divide A B) (join A B [PRED]) (let NAME VALUE BODY)

Predicates are ``(OP L R)`` with OP in = != < <= > >=, plus ``(and ...)``,
``(or ...)``, ``(not P)`` and ``(true)``.  In a comparison a bare symbol is
an attribute reference (``$1``, ``C1.n``); integers and double-quoted strings
are constants.  Lists of attribute names are written as strings.

ESO file::

    (eso (vocabulary (EDGES 2)) (guess (C 1)) (forall x y) (exists) (matrix F))

Formulas are ``(atom P t ...)``, ``(= t t)``, ``(and ...)``, ``(or ...)`` and
``(not F)``; a symbol term is a variable, a number or string a constant.
"""
from __future__ import annotations

import sexpdata
from sexpdata import Symbol

from .algebra import (
    And,
    Attr,
    BaseRel,
    Cmp,
    Difference,
    Divide,
    DomPower,
    GuessedRel,
    Intersect,
    Join,
    Let,
    Literal,
    Not,
    Or,
    Product,
    Project,
    Ref,
    Rename,
    Select,
    SymDiff,
    TruePred,
    Union_,
    Val,
)
from .engine import GuessDecl, NpAlgQuery
from .relation import Relation, RelAlgError
from .translate import Atom, Const, Eq, EsoSentence, FAnd, FNot, FOr, Var


class FormatError(RelAlgError):
    pass


_BINARY = {
    "product": Product,
    "union": Union_,
    "difference": Difference,
    "intersect": Intersect,
    "symdiff": SymDiff,
    "divide": Divide,
}
_BINARY_NAME = {v: k for k, v in _BINARY.items()}
_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


def read(text: str):
    try:
        return sexpdata.loads(text, nil=None, true=None)
    except Exception as exc:  # sexpdata raises several unrelated types
        raise FormatError(f"malformed s-expression: {exc}") from None


def _sym(x, what: str) -> str:
    if isinstance(x, Symbol):
        return x.value()
    if isinstance(x, str):
        return x
    raise FormatError(f"expected {what}, got {x!r}")


def _head(x) -> str:
    if not isinstance(x, list) or not x or not isinstance(x[0], Symbol):
        raise FormatError(f"expected a form, got {x!r}")
    return x[0].value()


def _int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"expected an integer for {what}, got {x!r}")
    return x


def _const(x):
    if isinstance(x, bool) or not isinstance(x, (int, str)) or isinstance(x, Symbol):
        raise FormatError(f"constants are integers or strings, got {x!r}")
    return x


def _names(x, what: str) -> tuple:
    if not isinstance(x, list):
        raise FormatError(f"expected a list of {what}")
    return tuple(_sym(n, what) for n in x)


# ------------------------------------------------------------------ reading


def parse_pred(x):
    h = _head(x)
    if h in _CMP_OPS:
        if len(x) != 3:
            raise FormatError(f"({h} ...) takes two operands")
        return Cmp(_operand(x[1]), h, _operand(x[2]))
    if h == "and":
        return And(tuple(parse_pred(p) for p in x[1:]))
    if h == "or":
        return Or(tuple(parse_pred(p) for p in x[1:]))
    if h == "not" and len(x) == 2:
        return Not(parse_pred(x[1]))
    if h == "true" and len(x) == 1:
        return TruePred()
    raise FormatError(f"unknown predicate form ({h} ...)")


def _operand(x):
    if isinstance(x, Symbol):
        return Attr(x.value())
    return Val(_const(x))


def parse_expr(x):
    h = _head(x)
    args = x[1:]
    try:
        if h in ("base", "guessed") and len(args) in (1, 2):
            cls = BaseRel if h == "base" else GuessedRel
            return cls(_sym(args[0], "a name"), _sym(args[1], "an alias") if len(args) == 2 else None)
        if h == "ref" and len(args) == 1:
            return Ref(_sym(args[0], "a name"))
        if h == "dom" and len(args) == 1:
            return DomPower(_int(args[0], "dom"))
        if h == "literal" and args:
            cols = _names(args[0], "column names")
            return Literal(Relation(cols, [tuple(_const(v) for v in row) for row in args[1:]]))
        if h == "select" and len(args) == 2:
            return Select(parse_expr(args[0]), parse_pred(args[1]))
        if h in ("project", "project-implicit") and len(args) == 2:
            return Project(parse_expr(args[0]), _names(args[1], "attributes"), h == "project-implicit")
        if h == "rename" and len(args) == 2:
            pairs = tuple(_names(p, "a rename pair") for p in args[1])
            if any(len(p) != 2 for p in pairs):
                raise FormatError("rename pairs are (\"old\" \"new\")")
            return Rename(parse_expr(args[0]), pairs)
        if h in _BINARY and len(args) == 2:
            return _BINARY[h](parse_expr(args[0]), parse_expr(args[1]))
        if h == "join" and len(args) in (2, 3):
            cond = parse_pred(args[2]) if len(args) == 3 else None
            return Join(parse_expr(args[0]), parse_expr(args[1]), cond)
        if h == "let" and len(args) == 3:
            return Let(_sym(args[0], "a name"), parse_expr(args[1]), parse_expr(args[2]))
    except TypeError as exc:
        raise FormatError(f"bad ({h} ...): {exc}") from None
    raise FormatError(f"unknown or malformed expression form ({h} ...)")


def parse_query(text: str) -> NpAlgQuery:
    x = read(text)
    if _head(x) != "npalg-query":
        raise FormatError("a query file starts with (npalg-query ...)")
    rest = x[1:]
    name = ""
    if rest and not isinstance(rest[0], list):
        name = _sym(rest[0], "a query name")
        rest = rest[1:]
    guesses, lets, fail = [], [], None
    for form in rest:
        h = _head(form)
        if h == "guess" and len(form) == 3:
            guesses.append(GuessDecl(_sym(form[1], "a relation name"), _int(form[2], "arity")))
        elif h == "let" and len(form) == 3:
            lets.append((_sym(form[1], "a name"), parse_expr(form[2])))
        elif h == "fail" and len(form) == 2:
            if fail is not None:
                raise FormatError("more than one (fail ...) form")
            fail = parse_expr(form[1])
        else:
            raise FormatError(f"unexpected form ({h} ...) in a query")
    if fail is None:
        raise FormatError("a query needs a (fail ...) form")
    return NpAlgQuery(tuple(guesses), fail, tuple(lets), name=name)


def parse_formula(x):
    h = _head(x)
    if h == "atom" and len(x) >= 2:
        return Atom(_sym(x[1], "a predicate"), tuple(_term(t) for t in x[2:]))
    if h == "=" and len(x) == 3:
        return Eq(_term(x[1]), _term(x[2]))
    if h in ("and", "or") and len(x) >= 2:
        parts = [parse_formula(f) for f in x[1:]]
        out = parts[0]
        for p in parts[1:]:
            out = FAnd(out, p) if h == "and" else FOr(out, p)
        return out
    if h == "not" and len(x) == 2:
        return FNot(parse_formula(x[1]))
    raise FormatError(f"unknown formula form ({h} ...)")


def _term(x):
    if isinstance(x, Symbol):
        return Var(x.value())
    return Const(_const(x))


def parse_eso(text: str) -> tuple[EsoSentence, dict]:
    """(sentence, vocabulary) from an ESO file."""
    x = read(text)
    if _head(x) != "eso":
        raise FormatError("an ESO file starts with (eso ...)")
    parts = {}
    for form in x[1:]:
        h = _head(form)
        if h in parts:
            raise FormatError(f"duplicate ({h} ...) form")
        parts[h] = form[1:]
    unknown = set(parts) - {"vocabulary", "guess", "forall", "exists", "matrix"}
    if unknown:
        raise FormatError(f"unknown ESO forms {sorted(unknown)}")
    if "matrix" not in parts or len(parts["matrix"]) != 1:
        raise FormatError("an ESO file needs exactly one (matrix F)")

    def decls(key):
        return tuple((_sym(d[0], "a predicate"), _int(d[1], "arity")) for d in parts.get(key, ()))

    vocab = dict(decls("vocabulary"))
    s = EsoSentence(
        decls("guess"),
        tuple(_sym(v, "a variable") for v in parts.get("forall", ())),
        tuple(_sym(v, "a variable") for v in parts.get("exists", ())),
        parse_formula(parts["matrix"][0]),
    )
    return s, vocab


# ------------------------------------------------------------------ writing


def _atomic(v) -> str:
    return sexpdata.dumps(v)


def _s(name: str) -> str:
    """A name as a symbol when it reads back as one, else as a string."""
    if name and all(c.isalnum() or c in "_$.-" for c in name) and not name.lstrip("-").isdigit():
        return name
    return _atomic(name)


def pred_sx(p) -> list:
    if isinstance(p, Cmp):
        return [p.op, _op_sx(p.left), _op_sx(p.right)]
    if isinstance(p, And):
        return ["and"] + [pred_sx(i) for i in p.items]
    if isinstance(p, Or):
        return ["or"] + [pred_sx(i) for i in p.items]
    if isinstance(p, Not):
        return ["not", pred_sx(p.item)]
    if isinstance(p, TruePred):
        return ["true"]
    raise FormatError(f"cannot write predicate {p!r}")


def _op_sx(o) -> str:
    if isinstance(o, Attr):
        if not o.ref or any(c.isspace() or c in '()"' for c in o.ref):
            raise FormatError(f"attribute {o.ref!r} cannot be written as a symbol")
        return o.ref
    return _atomic(o.value)


def _strs(names) -> list:
    return [_atomic(n) for n in names]


def expr_sx(e) -> list:
    if isinstance(e, (BaseRel, GuessedRel)):
        out = ["base" if isinstance(e, BaseRel) else "guessed", _s(e.name)]
        return out + ([_s(e.alias)] if e.alias else [])
    if isinstance(e, Ref):
        return ["ref", _s(e.name)]
    if isinstance(e, DomPower):
        return ["dom", str(e.k)]
    if isinstance(e, Literal):
        rows = [[_atomic(v) for v in r] for r in e.relation.rows()]
        return ["literal", _strs(e.relation.schema)] + rows
    if isinstance(e, Select):
        return ["select", expr_sx(e.child), pred_sx(e.pred)]
    if isinstance(e, Project):
        return ["project-implicit" if e.implicit else "project", expr_sx(e.child), _strs(e.attrs)]
    if isinstance(e, Rename):
        return ["rename", expr_sx(e.child), [_strs(p) for p in e.mapping]]
    if type(e) in _BINARY_NAME:
        return [_BINARY_NAME[type(e)], expr_sx(e.left), expr_sx(e.right)]
    if isinstance(e, Join):
        out = ["join", expr_sx(e.left), expr_sx(e.right)]
        return out + ([pred_sx(e.cond)] if e.cond is not None else [])
    if isinstance(e, Let):
        return ["let", _s(e.name), expr_sx(e.value), expr_sx(e.body)]
    raise FormatError(f"cannot write expression {type(e).__name__}")


def render(x, indent: int = 0, width: int = 78) -> str:
    """Lay out nested lists of pre-rendered atoms, breaking long forms."""
    if not isinstance(x, list):
        return x
    flat = "(" + " ".join(render(i, 0, 10**9) for i in x) + ")"
    if len(flat) + indent <= width or len(x) < 2:
        return flat
    pad = " " * (indent + 2)
    head = render(x[0], indent + 1, width)
    body = "\n".join(pad + render(i, indent + 2, width) for i in x[1:])
    return f"({head}\n{body})"


def format_query(q: NpAlgQuery) -> str:
    forms: list = ["npalg-query"]
    if q.name:
        forms.append(_atomic(q.name))
    forms += [["guess", _s(g.name), str(g.arity)] for g in q.guesses]
    forms += [["let", _s(n), expr_sx(e)] for n, e in q.lets]
    forms.append(["fail", expr_sx(q.fail)])
    return render(forms) + "\n"


def formula_sx(f) -> list:
    if isinstance(f, Atom):
        return ["atom", _s(f.pred)] + [_term_sx(t) for t in f.args]
    if isinstance(f, Eq):
        return ["=", _term_sx(f.left), _term_sx(f.right)]
    if isinstance(f, FAnd):
        return ["and", formula_sx(f.left), formula_sx(f.right)]
    if isinstance(f, FOr):
        return ["or", formula_sx(f.left), formula_sx(f.right)]
    if isinstance(f, FNot):
        return ["not", formula_sx(f.item)]
    raise FormatError(f"cannot write formula {f!r}")


def _term_sx(t) -> str:
    return t.name if isinstance(t, Var) else _atomic(t.value)


def format_eso(s: EsoSentence, vocab: dict) -> str:
    forms = [
        "eso",
        ["vocabulary"] + [[_s(n), str(a)] for n, a in sorted(vocab.items())],
        ["guess"] + [[_s(n), str(a)] for n, a in s.second_order],
        ["forall"] + list(s.universal),
        ["exists"] + list(s.existential),
        ["matrix", formula_sx(s.matrix)],
    ]
    return render(forms) + "\n"
