"""Shared builders for the test suite."""
from __future__ import annotations

import itertools
import random

import pytest

from npalg.fixtures import fixture
from npalg.relation import Database, Relation

REF_NODES = (1, 2, 3, 4)
REF_EDGES = ((1, 2), (1, 4), (2, 3))


def graph_db(nodes, edges, symmetric: bool = True, loops: bool = False) -> Database:
    es = set(edges)
    if symmetric:
        es |= {(b, a) for a, b in es}
    if loops:
        es |= {(n, n) for n in nodes}
    return Database(
        {
            "NODES": Relation(("n",), ((n,) for n in nodes)),
            "EDGES": Relation(("from", "to"), es),
        }
    )


def reference_db() -> Database:
    return graph_db(REF_NODES, REF_EDGES, symmetric=False)


def all_graphs(n: int):
    """Every simple undirected graph on nodes 1..n."""
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    for mask in range(1 << len(pairs)):
        yield [p for i, p in enumerate(pairs) if mask >> i & 1]


def random_graph(rng: random.Random, n: int, p: float = 0.4):
    return [pr for pr in itertools.combinations(range(1, n + 1), 2) if rng.random() < p]


def is_bipartite(nodes, edges) -> bool:
    for colours in itertools.product((0, 1), repeat=len(nodes)):
        c = dict(zip(nodes, colours))
        if all(c[a] != c[b] for a, b in edges):
            return True
    return False


@pytest.fixture(scope="session")
def coloring_query():
    return fixture("coloring-reference-3").load_query()


@pytest.fixture(scope="session")
def two_coloring_query():
    return fixture("2-coloring-path").load_query()


@pytest.fixture(scope="session")
def cliques_query():
    return fixture("2-partition-cliques-yes").load_query()


@pytest.fixture(scope="session")
def disconnectivity_query():
    return fixture("disconnectivity-yes").load_query()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
