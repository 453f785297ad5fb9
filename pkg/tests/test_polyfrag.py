import random
import time

import pytest

from npalg.engine import check, solve_exact
from npalg.fixtures import fixture
from npalg.polyfrag import NotInFragment, classify, solve_poly, to_2sat
from npalg.sexpr import format_query, parse_query
from npalg.twosat import solve_2sat

from conftest import all_graphs, graph_db, is_bipartite, random_graph


def decisions_agree(query, db) -> bool:
    poly = solve_poly(query, db)
    if poly.answer:
        assert check(query, db, poly.witness)
    return poly.answer == (solve_exact(query, db) is not None)


def test_classify_examples(two_coloring_query, cliques_query, coloring_query, disconnectivity_query):
    assert classify(two_coloring_query).tag == "Eaa"
    assert classify(cliques_query).tag == "Eaa"
    assert classify(coloring_query).tag == "General"
    assert classify(disconnectivity_query).tag == "E1eStarAa"


def test_classify_general_reason(coloring_query):
    fc = classify(coloring_query)
    assert fc.reason and fc.describe()["tag"] == "General"


def test_classify_stable_under_renaming(two_coloring_query, disconnectivity_query):
    for q in (two_coloring_query, disconnectivity_query):
        text = format_query(q)
        g = q.guesses[0].name
        renamed = parse_query(text.replace(f"(guess {g} ", "(guess ZZ ").replace(f"(guessed {g})", "(guessed ZZ)"))
        renamed = parse_query(format_query(renamed).replace('"x1"', '"a1"').replace('"y1"', '"b1"'))
        assert classify(renamed).tag == classify(q).tag


def test_to_2sat_triangle_unsat(two_coloring_query):
    db = graph_db((1, 2, 3), [(1, 2), (2, 3), (1, 3)])
    inst = to_2sat(two_coloring_query, db)
    assert inst.num_vars == 3
    assert solve_2sat(inst) is None
    assert solve_exact(two_coloring_query, db) is None


def test_to_2sat_single_edge_sat(two_coloring_query):
    db = graph_db((1, 2), [(1, 2)])
    assert solve_2sat(to_2sat(two_coloring_query, db)) is not None
    assert solve_exact(two_coloring_query, db) is not None


def test_edgeless_cliques(cliques_query):
    for n in (1, 2, 3):
        db = graph_db(tuple(range(1, n + 1)), [], loops=True)
        assert decisions_agree(cliques_query, db)


def test_e1e_needs_binding(disconnectivity_query):
    db = fixture("disconnectivity-yes").load_db()
    with pytest.raises(NotInFragment):
        to_2sat(disconnectivity_query, db)
    assert to_2sat(disconnectivity_query, db, exists=(1, 3)).num_vars == 4


def test_general_query_rejected(coloring_query):
    with pytest.raises(NotInFragment):
        solve_poly(coloring_query, fixture("coloring-reference-3").load_db())


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exhaustive_small_graphs(n, two_coloring_query, cliques_query):
    nodes = tuple(range(1, n + 1))
    for edges in all_graphs(n):
        assert decisions_agree(two_coloring_query, graph_db(nodes, edges))
        assert decisions_agree(cliques_query, graph_db(nodes, edges, loops=True))


def test_random_five_and_six_node_graphs(two_coloring_query, cliques_query):
    rng = random.Random(3)
    for _ in range(30):
        n = rng.choice((5, 6))
        nodes = tuple(range(1, n + 1))
        edges = random_graph(rng, n)
        assert solve_poly(two_coloring_query, graph_db(nodes, edges)).answer == is_bipartite(nodes, edges)
        assert decisions_agree(cliques_query, graph_db(nodes, edges, loops=True))


def test_odd_cycles_are_not_two_colorable(two_coloring_query):
    for n in (3, 5, 7, 9):
        nodes = tuple(range(1, n + 1))
        edges = [(i, i % n + 1) for i in nodes]
        assert not solve_poly(two_coloring_query, graph_db(nodes, edges)).answer


def test_large_bipartite_graph_is_fast(two_coloring_query):
    rng = random.Random(5)
    nodes = tuple(range(1, 101))
    edges = [(a, b) for a in range(1, 51) for b in range(51, 101) if rng.random() < 0.06]
    db = graph_db(nodes, edges)
    start = time.perf_counter()
    res = solve_poly(two_coloring_query, db)
    assert res.answer and check(two_coloring_query, db, res.witness)
    assert time.perf_counter() - start < 5.0


def test_disconnectivity(disconnectivity_query):
    for name in ("disconnectivity-yes", "disconnectivity-no"):
        f = fixture(name)
        db = f.load_db()
        res = solve_poly(disconnectivity_query, db)
        assert res.answer == f.expected == (solve_exact(disconnectivity_query, db) is not None)
        if res.answer:
            assert res.binding is not None and check(disconnectivity_query, db, res.witness)


def test_disconnectivity_random_graphs(disconnectivity_query):
    rng = random.Random(9)
    for _ in range(15):
        n = rng.randint(2, 5)
        db = graph_db(tuple(range(1, n + 1)), random_graph(rng, n, 0.5))
        assert decisions_agree(disconnectivity_query, db)
