import pytest

from npalg.consql import lower_spec, solve_exhaustive
from npalg.engine import check, search_exact
from npalg.fixtures import fixture, fixtures
from npalg.polyfrag import classify, solve_poly

NPALG = [f for f in fixtures() if f.kind == "npalg"]
CONSQL = [f for f in fixtures() if f.kind == "consql"]


def test_corpus_shape():
    names = [f.name for f in fixtures()]
    assert len(names) == len(set(names)) == 25
    assert len(CONSQL) == 5
    assert any(f.expected for f in NPALG) and any(not f.expected for f in NPALG)


@pytest.mark.parametrize("f", NPALG, ids=lambda f: f.name)
def test_npalg_fixture_decision(f):
    q, db = f.load_query(), f.load_db()
    res = search_exact(q, db, budget=None)
    assert res.answer == f.expected
    assert res.examined == f.extra["examined"]
    if res.answer:
        assert check(q, db, res.witness)


@pytest.mark.parametrize("f", [f for f in NPALG if f.fragment], ids=lambda f: f.name)
def test_fragment_tags(f):
    q = f.load_query()
    assert classify(q).tag == f.fragment
    if f.fragment != "General":
        assert solve_poly(q, f.load_db()).answer == f.expected


@pytest.mark.parametrize("f", CONSQL, ids=lambda f: f.name)
def test_consql_fixture_decision(f):
    inst = f.load_instance()
    p = lower_spec(f.load_spec(), inst.db, inst.keys)
    res = solve_exhaustive(p)
    assert res.answer == f.expected
    assert res.examined == f.extra["examined"]
    if f.objective is not None:
        assert res.cost.objective == f.objective
    if res.answer:
        assert all(ok for ok, _ in p.condition_results(res.state))


def test_reference_witness_checks():
    f = fixture("coloring-reference-3")
    w = f.load_witness()
    assert check(f.load_query(), f.load_db(), w)
    assert {k: sorted(v.rows()) for k, v in w.items()} == {"Q1": [(2,), (4,)], "Q2": [(1,)], "Q3": [(3,)]}


def test_known_objectives():
    assert {f.name: f.objective for f in CONSQL if f.objective is not None} == {
        "consql-timetabling-toy": 6,
        "consql-aircraft-one": 6,
        "consql-aircraft-two": 2,
    }


def test_unknown_fixture():
    with pytest.raises(KeyError):
        fixture("nope")
