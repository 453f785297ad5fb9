"""Acceptance criteria 1-8, one test each.

Every test records a PASS/FAIL line with its runtime; the lines are printed
in the terminal summary (see conftest.py) and, with ``-s``, as they finish.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import contextlib
import random
import time

import pytest

import fo_oracle
import sugar_oracle
from circuit_cases import cases, decision_agrees, fail_circuit_empty, perturbation_failures
from conftest import REF_EDGES, REF_NODES, all_graphs, graph_db, reference_db, random_graph
from npalg.algebra import Difference, DomPower
from npalg.circuit import forced_gate_extension
from npalg.consql import lower_spec, parse_spec, solve_exhaustive
from npalg.engine import GuessDecl, NpAlgQuery, all_solutions, check, fail_relation, iter_witnesses, search_exact, solve_exact, witness_from
from npalg.fixtures import fixture, fixtures, spec_path
from npalg.localsearch import NpAlgProblem, SolverParams, hill_climb, run, tabu_search
from npalg.polyfrag import solve_poly
from npalg.relation import Database, Relation
from npalg.space import state_valid

RESULTS: dict[int, str] = {}


@contextlib.contextmanager
def criterion(n: int, title: str, limit: float | None = None):
    start = time.perf_counter()
    notes: list[str] = []
    try:
        yield notes
        elapsed = time.perf_counter() - start
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        RESULTS[n] = f"criterion {n} FAIL  {title} ({elapsed:.2f} s): {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}"
        print("\n" + RESULTS[n])
        raise
    detail = "; ".join(notes)
    RESULTS[n] = f"criterion {n} PASS  {title} ({elapsed:.2f} s){': ' + detail if detail else ''}"
    print("\n" + RESULTS[n])


# -------------------------------------------------------------------- 1


def test_criterion_1_reference_instance(coloring_query):
    with criterion(1, "reference instance regression", limit=1.0) as notes:
        db = reference_db()
        assert db["NODES"].rows() == [(n,) for n in REF_NODES]
        assert set(db["EDGES"].tuples) == set(REF_EDGES)
        w = witness_from(coloring_query, {"Q1": [(2,), (4,)], "Q2": [(1,)], "Q3": [(3,)]})
        assert len(fail_relation(coloring_query, db, w)) == 0
        exact = solve_exact(coloring_query, db)
        assert exact is not None and check(coloring_query, db, exact)
        p = NpAlgProblem(coloring_query, db)
        hill = hill_climb(p, SolverParams(seed=0))
        assert hill.answer and check(coloring_query, db, p.witness(hill.state))
        notes.append(f"hill used {hill.restarts_used} restart(s)")


# -------------------------------------------------------------------- 2


def test_criterion_2_exact_counting():
    with criterion(2, "exact-semantics counting") as notes:
        db = Database({"R": Relation.unary([1, 2])})
        for arity, want in ((1, 4), (2, 16)):
            # FAIL = DOM never empties, so the scan visits every extension
            never = NpAlgQuery((GuessDecl("Q", arity),), DomPower(1))
            assert search_exact(never, db, budget=None).examined == want
            assert len({tuple(sorted(w["Q"].tuples)) for w in iter_witnesses(never, db)}) == want
            always = NpAlgQuery((GuessDecl("Q", arity),), Difference(DomPower(1), DomPower(1)))
            assert len(all_solutions(always, db)) == want
            notes.append(f"arity {arity}: {want}")


# -------------------------------------------------------------------- 3


def test_criterion_3_sugar_oracles():
    with criterion(3, "sugar oracle suite", limit=60.0) as notes:
        total = 0
        for res in sugar_oracle.all_sweeps(3):
            assert res.mismatches == [], (res.kind, res.mismatches[:3])
            total += res.checked
            if res.sampled:
                assert res.positives > 0
                notes.append(f"{res.kind} sampled with {res.positives} positives")
        notes.insert(0, f"{total} configurations, 0 mismatches")


# -------------------------------------------------------------------- 4


def test_criterion_4_polynomial_fragment(two_coloring_query, cliques_query):
    with criterion(4, "polynomial-fragment equivalence") as notes:
        checked = 0
        for n in range(1, 5):
            nodes = tuple(range(1, n + 1))
            for edges in all_graphs(n):
                for q, db in ((two_coloring_query, graph_db(nodes, edges)), (cliques_query, graph_db(nodes, edges, loops=True))):
                    assert solve_poly(q, db).answer == (solve_exact(q, db) is not None), (n, edges)
                    checked += 1
        rng = random.Random(4)
        for _ in range(200):
            n = rng.choice((5, 6))
            nodes = tuple(range(1, n + 1))
            edges = random_graph(rng, n)
            for q, db in ((two_coloring_query, graph_db(nodes, edges)), (cliques_query, graph_db(nodes, edges, loops=True))):
                assert solve_poly(q, db).answer == (solve_exact(q, db, budget=None) is not None), (n, edges)
                checked += 1
        big = [(a, b) for a in range(1, 51) for b in range(51, 101) if rng.random() < 0.06]
        db = graph_db(tuple(range(1, 101)), big)
        start = time.perf_counter()
        res = solve_poly(two_coloring_query, db)
        took = time.perf_counter() - start
        assert res.answer and took < 1.0, took
        notes.append(f"{checked} graph/query pairs agree; 100-node bipartite yes in {took:.3f} s")


# -------------------------------------------------------------------- 5


def test_criterion_5_translation_fidelity():
    with criterion(5, "translation fidelity") as notes:
        rng = random.Random(55)
        for _ in range(500):
            db = fo_oracle.random_db(rng, rng.randint(1, 3))
            phi = fo_oracle.random_formula(rng, rng.randint(1, 3), ["x", "y", "z"])
            assert fo_oracle.translation_mismatches(phi, db) == [], phi
        for _ in range(100):
            s = fo_oracle.random_eso(rng)
            db = fo_oracle.random_db(rng, rng.randint(1, 3))
            assert not fo_oracle.eso_mismatch(s, db), s
        notes.append("500 formulas, 100 ESO sentences, 0 mismatches")


# -------------------------------------------------------------------- 6


def test_criterion_6_succinct_pipeline():
    with criterion(6, "circuit pipeline", limit=30.0) as notes:
        cs = cases()
        for name, c in cs:
            assert c.n <= 2
            assert fail_circuit_empty(c, forced_gate_extension(c)), name
            assert perturbation_failures(c) == [], name
            assert decision_agrees(c), name
        notes.append(f"{len(cs)} circuits")


# -------------------------------------------------------------------- 7


def test_criterion_7_consql_end_to_end():
    with criterion(7, "specification language end to end", limit=60.0) as notes:
        for name in ("graph_coloring.sql", "university_timetabling.sql", "aircraft_landing.sql"):
            parse_spec(spec_path(name).read_text(encoding="utf-8"))
        f = fixture("consql-graph-coloring")
        p = lower_spec(f.load_spec(), f.load_db())
        res = solve_exhaustive(p)
        assert res.answer
        for name in ("consql-timetabling-toy", "consql-aircraft-one", "consql-aircraft-two"):
            f = fixture(name)
            inst = f.load_instance()
            p = lower_spec(f.load_spec(), inst.db, inst.keys)
            assert p.size() <= 10**4
            best = solve_exhaustive(p)
            assert best.cost.objective == f.objective
            tabu = tabu_search(p, SolverParams(seed=0, restarts=20, max_idle=5))
            assert tabu.answer and tabu.cost.objective == best.cost.objective, (name, tabu.cost, best.cost)
            notes.append(f"{name} optimum {best.cost.objective}")


# -------------------------------------------------------------------- 8


def corpus_problems():
    for f in fixtures():
        inst = f.load_instance()
        if f.kind == "npalg":
            yield f.name, NpAlgProblem(f.load_query(), inst.db)
        else:
            yield f.name, lower_spec(f.load_spec(), inst.db, inst.keys)


def _fingerprint(res):
    return res.state, res.cost, res.restarts_used, res.iterations, [(t.stage, t.costs) for t in res.traces]


def test_criterion_8_local_search_properties():
    with criterion(8, "local-search properties over the corpus") as notes:
        count = 0
        for name, p in corpus_problems():
            hp = SolverParams(seed=0, restarts=3, max_iters=200, strategy=("hill",), assert_valid=True)
            hill = run(p, hp)
            for t in hill.traces:
                assert all(b < a for a, b in zip(t.costs, t.costs[1:])), name
            assert state_valid(p.components, hill.state), name
            tp = SolverParams(seed=0, restarts=3, max_iters=200, max_idle=5, strategy=("tabu",), assert_valid=True)
            tabu = run(p, tp)
            assert state_valid(p.components, tabu.state), name
            assert _fingerprint(run(p, tp)) == _fingerprint(tabu), name
            assert _fingerprint(run(p, SolverParams(**{**tp.__dict__, "workers": 4}))) == _fingerprint(tabu), name
            assert _fingerprint(run(p, hp)) == _fingerprint(hill), name
            count += 1
        notes.append(f"{count} fixtures")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
