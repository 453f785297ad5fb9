"""Regenerate the fixture corpus under src/npalg/fixtures.

Queries are assembled with the library's builders, written in the text
format, and every expected decision is recomputed by exhaustive search
before anything is written.  Run from the repository root:

    python3 scripts/build_fixtures.py
"""
from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from npalg.algebra import (  # noqa: E402
    C,
    BaseRel,
    Difference,
    Divide,
    DomPower,
    GuessedRel,
    Intersect,
    Join,
    Product,
    Project,
    Rename,
    Select,
    conj,
    union_all,
)
from npalg.circuit import Circuit, adjacency_circuit  # noqa: E402
from npalg.consql.model import lower_spec, solve_exhaustive  # noqa: E402
from npalg.consql.parser import parse_spec  # noqa: E402
from npalg.csvio import load_instance, save_db  # noqa: E402
from npalg.engine import GuessDecl, NpAlgQuery, check, search_exact, witness_from  # noqa: E402
from npalg.relation import Database, Relation  # noqa: E402
from npalg.sexpr import format_eso, format_query  # noqa: E402
from npalg.sugar import (  # noqa: E402
    build_complement,
    build_empty,
    build_fail_partition,
    build_fail_successor,
    compose,
    fail_eq_size,
    fail_geq_size,
)
from npalg.translate import EsoSentence, FAnd, FNot, FOr, atom, translate_fo  # noqa: E402

OUT = ROOT / "src" / "npalg" / "fixtures"


def graph(nodes, edges, node_col="n", cols=("from", "to")) -> dict:
    return {
        "NODES": Relation((node_col,), [(v,) for v in nodes]),
        "EDGES": Relation(cols, edges),
    }


def sym(edges):
    return sorted(set(edges) | {(b, a) for a, b in edges})


# ------------------------------------------------------------ NP-Alg queries


def coloring_query(k: int) -> NpAlgQuery:
    qs = [GuessedRel(f"Q{i}") for i in range(1, k + 1)]
    partition = build_fail_partition(BaseRel("NODES"), qs)
    edge = conj(C("$1", "=", "EDGES.from"), C("$2", "=", "EDGES.to"))
    coloring = Project(
        union_all([Join(Select(Product(q, q), C("$1", "!=", "$2")), BaseRel("EDGES"), edge) for q in qs]),
        ("$1",),
    )
    return NpAlgQuery(
        tuple(GuessDecl(f"Q{i}", 1) for i in range(1, k + 1)),
        union_all([partition, coloring]),
        name=f"{k}-coloring",
    )


def independent_set_query() -> NpAlgQuery:
    n = GuessedRel("N")
    edge = conj(C("$1", "=", "EDGES.from"), C("$2", "=", "EDGES.to"))
    fail = union_all(
        [
            fail_geq_size("AUX", n, BaseRel("K")),
            Project(Join(Product(n, n), BaseRel("EDGES"), edge), ("$1",)),
        ]
    )
    return NpAlgQuery((GuessDecl("AUX", 2), GuessDecl("N", 1)), fail, name="independent-set")


def clique_query() -> NpAlgQuery:
    n = GuessedRel("N")
    pair = conj(C("$1", "=", "$1"), C("$2", "=", "$2"))
    missing = Project(
        Join(Select(Product(n, n), C("$1", "!=", "$2")), build_complement(BaseRel("EDGES"), 2), pair), ("$1",)
    )
    fail = union_all([fail_geq_size("AUX", n, BaseRel("K")), missing])
    return NpAlgQuery((GuessDecl("AUX", 2), GuessDecl("N", 1)), fail, name="clique")


def dom_square():
    return Product(DomPower(1), DomPower(1))


def two_coloring_query() -> NpAlgQuery:
    c = GuessedRel("C")
    rhs = union_all(
        [
            build_complement(BaseRel("EDGES"), 2),
            Product(c, build_complement(c, 1)),
            Product(build_complement(c, 1), c),
        ]
    )
    return NpAlgQuery((GuessDecl("C", 1),), Difference(dom_square(), rhs), name="2-coloring")


def two_cliques_query() -> NpAlgQuery:
    p = GuessedRel("P")
    rhs = union_all(
        [
            Product(build_complement(p, 1), p),
            Product(p, build_complement(p, 1)),
            BaseRel("EDGES"),
        ]
    )
    return NpAlgQuery((GuessDecl("P", 1),), Difference(dom_square(), rhs), name="2-partition-into-cliques")


def disconnectivity_query() -> NpAlgQuery:
    q = lambda v: atom("Q", v)  # noqa: E731
    closed = FOr(
        FNot(atom("EDGES", "y1", "y2")),
        FOr(FAnd(q("y1"), q("y2")), FAnd(FNot(q("y1")), FNot(q("y2")))),
    )
    phi = FAnd(FAnd(q("x1"), FNot(q("x2"))), closed)
    expr = translate_fo(phi, {"EDGES": 2, "Q": 1}, guessed=["Q"])
    x = Divide(expr, Rename(DomPower(2), (("$1", "y1"), ("$2", "y2"))))
    return NpAlgQuery((GuessDecl("Q", 1),), build_empty(x), name="disconnectivity")


def hamiltonian_query() -> NpAlgQuery:
    succ = GuessedRel("SUCC")
    fail = union_all(
        [
            build_fail_successor(succ, BaseRel("NODES"), "CLOSURE"),
            Project(Difference(succ, BaseRel("EDGES")), ("$1",)),
        ]
    )
    return NpAlgQuery((GuessDecl("SUCC", 2), GuessDecl("CLOSURE", 2)), fail, name="hamiltonian-path")


def unreachable_query() -> NpAlgQuery:
    """Some transitive T ⊇ EDGES avoids the PAIR tuple iff its target is unreachable."""
    t = GuessedRel("T")
    fail = union_all(
        [
            Project(Difference(BaseRel("EDGES"), t), ("$1",)),
            Project(Difference(compose(t, t, 1), t), ("$1",)),
            Project(Intersect(t, BaseRel("PAIR")), ("$1",)),
        ]
    )
    return NpAlgQuery((GuessDecl("T", 2),), fail, name="unreachable")


def sat_query() -> NpAlgQuery:
    """CNF with POS(c, v) / NEG(c, v) occurrence tables; T holds the true variables."""
    t = GuessedRel("T")
    pos_sat = Project(Join(BaseRel("POS"), t, C("POS.v", "=", "$1")), ("$1",))
    false_vars = Difference(BaseRel("VARS"), t)
    neg_sat = Project(Join(BaseRel("NEG"), false_vars, C("NEG.v", "=", "$1")), ("$1",))
    fail = union_all(
        [
            Difference(t, BaseRel("VARS")),
            Difference(BaseRel("CLAUSES"), union_all([pos_sat, neg_sat])),
        ]
    )
    return NpAlgQuery((GuessDecl("T", 1),), fail, name="sat")


def evenness_query() -> NpAlgQuery:
    """|R| is even iff R splits into H and R − H of equal size."""
    h = GuessedRel("H")
    r = BaseRel("R")
    fail = union_all([Difference(h, r), fail_eq_size("AUX", h, Difference(r, h))])
    return NpAlgQuery((GuessDecl("H", 1), GuessDecl("AUX", 2)), fail, name="evenness")


REF_NODES = [1, 2, 3, 4]
REF_EDGES = [(1, 2), (1, 4), (2, 3)]
TRIANGLE = [(1, 2), (2, 3), (1, 3)]


def npalg_fixtures():
    k = lambda n: {"K": Relation(("k",), [(i,) for i in range(1, n + 1)])}  # noqa: E731
    two_comp = graph([1, 2, 3, 4], sym([(1, 2), (3, 4)]))
    path4 = graph([1, 2, 3, 4], sym([(1, 2), (2, 3), (3, 4)]))
    return [
        dict(
            name="coloring-reference-3",
            query=coloring_query(3),
            db=graph(REF_NODES, REF_EDGES),
            witness={"Q1": [[2], [4]], "Q2": [[1]], "Q3": [[3]]},
            fragment="General",
        ),
        dict(name="coloring-triangle-2", query=coloring_query(2), db=graph([1, 2, 3], TRIANGLE)),
        dict(
            name="independent-set-k2",
            query=independent_set_query(),
            db={**graph(REF_NODES, REF_EDGES), **k(2)},
        ),
        dict(
            name="independent-set-triangle-k2",
            query=independent_set_query(),
            db={**graph([1, 2, 3], sym(TRIANGLE)), **k(2)},
        ),
        dict(name="clique-k3-triangle", query=clique_query(), db={**graph([1, 2, 3], sym(TRIANGLE)), **k(3)}),
        dict(
            name="clique-k3-path",
            query=clique_query(),
            db={**graph([1, 2, 3], sym([(1, 2), (2, 3)])), **k(3)},
        ),
        dict(name="2-coloring-path", query=two_coloring_query(), db=path4, fragment="Eaa"),
        dict(name="2-coloring-triangle", query=two_coloring_query(), db=graph([1, 2, 3], sym(TRIANGLE)), fragment="Eaa"),
        dict(
            name="2-partition-cliques-yes",
            query=two_cliques_query(),
            db=graph([1, 2, 3, 4], sym([(1, 2), (3, 4)]) + [(v, v) for v in range(1, 5)]),
            fragment="Eaa",
        ),
        dict(name="2-partition-cliques-no", query=two_cliques_query(), db=path4, fragment="Eaa"),
        dict(name="disconnectivity-yes", query=disconnectivity_query(), db=two_comp, fragment="E1eStarAa"),
        dict(name="disconnectivity-no", query=disconnectivity_query(), db=path4, fragment="E1eStarAa"),
        dict(name="hamiltonian-path-3", query=hamiltonian_query(), db=graph([1, 2, 3], [(1, 2), (2, 3)])),
        dict(name="hamiltonian-path-2", query=hamiltonian_query(), db=graph([1, 2], [])),
        dict(
            name="unreachable-yes",
            query=unreachable_query(),
            db={**graph([1, 2, 3], [(1, 2), (3, 2)]), "PAIR": Relation(("s", "t"), [(1, 3)])},
        ),
        dict(
            name="unreachable-no",
            query=unreachable_query(),
            db={**graph([1, 2, 3], [(1, 2), (2, 3)]), "PAIR": Relation(("s", "t"), [(1, 3)])},
        ),
        dict(
            name="sat-yes",
            # (x1 ∨ ¬x2) ∧ (x2 ∨ x3) ∧ (¬x1 ∨ ¬x3); clauses 11..13, variables 1..3
            query=sat_query(),
            db={
                "VARS": Relation(("v",), [(1,), (2,), (3,)]),
                "CLAUSES": Relation(("c",), [(11,), (12,), (13,)]),
                "POS": Relation(("c", "v"), [(11, 1), (12, 2), (12, 3)]),
                "NEG": Relation(("c", "v"), [(11, 2), (13, 1), (13, 3)]),
            },
        ),
        dict(
            name="sat-no",
            # x1 ∧ ¬x1
            query=sat_query(),
            db={
                "VARS": Relation(("v",), [(1,)]),
                "CLAUSES": Relation(("c",), [(11,), (12,)]),
                "POS": Relation(("c", "v"), [(11, 1)]),
                "NEG": Relation(("c", "v"), [(12, 1)]),
            },
        ),
        dict(name="evenness-yes", query=evenness_query(), db={"R": Relation(("x",), [(1,), (2,)])}),
        dict(name="evenness-no", query=evenness_query(), db={"R": Relation(("x",), [(1,), (2,), (3,)])}),
    ]


# ---------------------------------------------------------------- conSQL


def consql_fixtures():
    coloring = {
        "NODES": Relation(("n",), [(v,) for v in REF_NODES]),
        "EDGES": Relation(("f", "t"), REF_EDGES),
        "COLORS": Relation(("id", "name"), [(1, "red"), (2, "green"), (3, "blue")]),
    }
    triangle2 = {
        "NODES": Relation(("n",), [(1,), (2,), (3,)]),
        "EDGES": Relation(("f", "t"), TRIANGLE),
        "COLORS": Relation(("id", "name"), [(1, "red"), (2, "green")]),
    }
    timetabling = {
        "COURSE": Relation(("id", "num_lectures", "num_students"), [(1, 2, 30), (2, 1, 20), (3, 1, 40)]),
        "PERIOD": Relation(("id", "start", "finish"), [(1, 9, 11), (2, 11, 13), (3, 14, 16)]),
        "ROOM": Relation(("id", "capacity"), [(1, 50), (2, 30)]),
        "CONFLICT": Relation(
            ("course1", "course2", "num_students"),
            [(1, 2, 5), (2, 1, 5), (1, 3, 8), (3, 1, 8), (2, 3, 3), (3, 2, 3)],
        ),
        "UNAVAIL": Relation(("course", "period"), [(3, 1)]),
    }
    aircraft_cols = ("id", "target_time", "earliest_time", "latest_time", "bef_cost", "aft_cost")
    sep_cols = ("first", "second", "int_same_rw", "int_diff_rw")
    aircraft1 = {
        "AIRCRAFT": Relation(aircraft_cols, [(1, 10, 12, 30, 5, 3)]),
        "RUNWAY": Relation(("id",), [(1,), (2,)]),
        "SEPARATION": Relation(sep_cols, []),
    }
    aircraft2 = {
        "AIRCRAFT": Relation(aircraft_cols, [(1, 10, 5, 20, 2, 3), (2, 10, 5, 25, 4, 1)]),
        "RUNWAY": Relation(("id",), [(1,), (2,)]),
        "SEPARATION": Relation(sep_cols, [(1, 2, 5, 2), (2, 1, 5, 2)]),
    }
    return [
        dict(name="consql-graph-coloring", spec="graph_coloring.sql", db=coloring),
        dict(name="consql-graph-coloring-triangle-2", spec="graph_coloring.sql", db=triangle2),
        dict(name="consql-timetabling-toy", spec="university_timetabling.sql", db=timetabling),
        dict(name="consql-aircraft-one", spec="aircraft_landing.sql", db=aircraft1),
        dict(name="consql-aircraft-two", spec="aircraft_landing_small.sql", db=aircraft2),
    ]


# ------------------------------------------------------------------ writing


def main() -> None:
    for sub in ("queries", "data", "circuits", "eso"):
        shutil.rmtree(OUT / sub, ignore_errors=True)
        (OUT / sub).mkdir(parents=True)
    index = []

    for fx in npalg_fixtures():
        db = Database(fx["db"])
        q = fx["query"]
        res = search_exact(q, db, budget=None)
        if fx.get("witness") is not None:
            w = witness_from(q, {k: [tuple(t) for t in v] for k, v in fx["witness"].items()})
            assert check(q, db, w), fx["name"]
        qpath = OUT / "queries" / f"{fx['name']}.sx"
        qpath.write_text(format_query(q), encoding="utf-8")
        save_db(db, OUT / "data" / fx["name"])
        entry = {
            "name": fx["name"],
            "kind": "npalg",
            "query": f"queries/{fx['name']}.sx",
            "data": f"data/{fx['name']}",
            "expected": res.answer,
            "examined": res.examined,
        }
        if fx.get("witness") is not None:
            entry["witness"] = fx["witness"]
        if fx.get("fragment"):
            entry["fragment"] = fx["fragment"]
        index.append(entry)
        print(f"{fx['name']:32s} {res.answer!s:5s} examined {res.examined}")

    for fx in consql_fixtures():
        spec = parse_spec((OUT / "specs" / fx["spec"]).read_text(encoding="utf-8"))
        data = OUT / "data" / fx["name"]
        save_db(Database(fx["db"]), data)
        inst = load_instance(data)
        res = solve_exhaustive(lower_spec(spec, inst.db, inst.keys))
        entry = {
            "name": fx["name"],
            "kind": "consql",
            "spec": f"specs/{fx['spec']}",
            "data": f"data/{fx['name']}",
            "expected": res.answer,
            "examined": res.examined,
        }
        if spec.objective is not None and res.answer:
            entry["objective"] = res.cost.objective
        index.append(entry)
        print(f"{fx['name']:32s} {res.answer!s:5s} objective {entry.get('objective')} examined {res.examined}")

    circuits = {
        "and-of-inputs": Circuit(1, (("IN", 0, 0), ("IN", 0, 0), ("AND", 1, 2))),
        "path-2": adjacency_circuit(1, {((0,), (1,)), ((1,), (0,))}),
        "k4": adjacency_circuit(
            2, {(a, b) for a in [(0, 0), (0, 1), (1, 0), (1, 1)] for b in [(0, 0), (0, 1), (1, 0), (1, 1)] if a != b}
        ),
    }
    for name, c in circuits.items():
        (OUT / "circuits" / f"{name}.json").write_text(c.to_json() + "\n", encoding="utf-8")

    phi = FOr(
        FNot(atom("EDGES", "x", "y")),
        FOr(FAnd(atom("C", "x"), FNot(atom("C", "y"))), FAnd(FNot(atom("C", "x")), atom("C", "y"))),
    )
    eso = EsoSentence((("C", 1),), ("x", "y"), (), phi)
    (OUT / "eso" / "2-coloring.sx").write_text(format_eso(eso, {"EDGES": 2}), encoding="utf-8")

    (OUT / "index.json").write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
