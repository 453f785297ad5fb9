"""Random quantifier-free formulas and ESO sentences, with direct-evaluation checks."""
from __future__ import annotations

import itertools
import random

from npalg.algebra import evaluate
from npalg.engine import solve_exact
from npalg.relation import Database, Relation
from npalg.translate import (
    Atom,
    Const,
    EsoSentence,
    Eq,
    FAnd,
    FNot,
    FOr,
    Var,
    build_psi,
    eso_holds,
    free_vars,
    holds,
    translate_fo,
    translated_columns,
)

VOCAB = {"E": 2, "P": 1}


def random_db(rng: random.Random, n: int) -> Database:
    dom = list(range(1, n + 1))
    pairs = list(itertools.product(dom, repeat=2))
    return Database(
        {
            "V": Relation.unary(dom),
            "E": Relation.unnamed(2, [p for p in pairs if rng.random() < 0.4]),
            "P": Relation.unnamed(1, [(v,) for v in dom if rng.random() < 0.5]),
        }
    )


def _arg(rng, variables, consts):
    if consts and rng.random() < 0.2:
        return Const(rng.choice(consts))
    return Var(rng.choice(variables))


def random_atom(rng, variables, vocab, consts):
    while True:
        if rng.random() < 0.2:
            a = Eq(_arg(rng, variables, consts), _arg(rng, variables, consts))
        else:
            pred = rng.choice(sorted(vocab))
            a = Atom(pred, tuple(_arg(rng, variables, consts) for _ in range(vocab[pred])))
        if free_vars(a):
            return a


def random_formula(rng, atoms: int, variables, vocab=VOCAB, consts=(1, 2)):
    """A random and/or/not tree over exactly ``atoms`` atoms."""
    if atoms == 1:
        f = random_atom(rng, variables, vocab, consts)
    else:
        left = rng.randint(1, atoms - 1)
        sub = (random_formula(rng, left, variables, vocab, consts), random_formula(rng, atoms - left, variables, vocab, consts))
        f = (FAnd if rng.random() < 0.5 else FOr)(*sub)
    return FNot(f) if rng.random() < 0.3 else f


def translation_mismatches(phi, db: Database) -> list:
    """Assignments where membership in the translation and satisfaction disagree."""
    rel = evaluate(translate_fo(phi, VOCAB), db)
    cols = translated_columns(phi)
    base = {n: set(r.tuples) for n, r in db.relations.items()}
    bad = []
    for values in itertools.product(db.dom_values(), repeat=len(cols)):
        nu = dict(zip(cols, values))
        if (values in rel) != holds(phi, base, nu):
            bad.append(nu)
    return bad


def random_eso(rng: random.Random) -> EsoSentence:
    names = ["x", "y", "z"]
    nx = rng.randint(1, 2)
    xs = tuple(names[:nx])
    ys = tuple(names[nx : nx + rng.randint(0, 1)])
    vocab = {"E": 2, "C": 1}
    matrix = random_formula(rng, rng.randint(1, 3), list(xs + ys), vocab, consts=())
    return EsoSentence((("C", 1),), xs, ys, matrix)


def eso_mismatch(s: EsoSentence, db: Database) -> bool:
    vocab = {"E": 2, "V": 1}
    q = build_psi(s, vocab)
    return (solve_exact(q, db) is not None) != eso_holds(s, db)
