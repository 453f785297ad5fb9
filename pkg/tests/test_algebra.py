import pytest
from hypothesis import given, settings, strategies as st

from npalg.algebra import (
    BaseRel,
    C,
    Difference,
    Divide,
    DomPower,
    GuessedRel,
    Intersect,
    Join,
    Let,
    Literal,
    Product,
    Project,
    Ref,
    Rename,
    Select,
    SymDiff,
    Union_,
    conj,
    disj,
    divide,
    evaluate,
    infer_arity,
    sym_diff,
)
from npalg.engine import witness_from
from npalg.relation import ArityError, Database, RelAlgError, Relation, UnknownRelation

from conftest import reference_db

EMPTY = Database()


def lit(*rows, arity=None):
    arity = arity if arity is not None else len(rows[0])
    return Literal(Relation.unnamed(arity, rows))


def ev(e, db=EMPTY, ext=None):
    return evaluate(e, db, ext or {})


def test_select_equal_columns():
    assert ev(Select(lit((1, 1), (1, 2)), C("$1", "=", "$2"))).rows() == [(1, 1)]


def test_project_removes_duplicates():
    assert ev(Project(lit((1, 2), (1, 3)), ("$1",))).rows() == [(1,)]


def test_comparison_operators():
    r = lit((1,), (2,), (3,))
    assert ev(Select(r, C("$1", "<", 2))).rows() == [(1,)]
    assert ev(Select(r, C("$1", ">=", 2))).rows() == [(2,), (3,)]
    assert ev(Select(r, C("$1", "!=", 2))).rows() == [(1,), (3,)]
    assert ev(Select(r, disj(C("$1", "=", 1), C("$1", "=", 3)))).rows() == [(1,), (3,)]


def test_fail_is_empty_for_reference_witness(coloring_query):
    db = reference_db()
    w = witness_from(coloring_query, {"Q1": [(2,), (4,)], "Q2": [(1,)], "Q3": [(3,)]})
    assert len(evaluate(coloring_query.expr(), db, w)) == 0


def test_divide_basic():
    a = Relation.unnamed(2, [(1, "x"), (1, "y"), (2, "x")])
    b = Relation.unnamed(1, [("x",), ("y",)])
    assert divide(a, b).rows() == [(1,)]


def test_divide_empty_dividend():
    assert len(divide(Relation.unnamed(2), Relation.unnamed(1, [("x",)]))) == 0


def test_divide_by_empty_is_an_error():
    with pytest.raises(ArityError):
        divide(Relation.unnamed(2, [(1, 2)]), Relation.unnamed(1))


def test_divide_arity_violation():
    with pytest.raises(ArityError):
        divide(Relation.unnamed(1, [(1,)]), Relation.unnamed(1, [(1,)]))


def test_divide_node():
    e = Divide(lit((1, "x"), (1, "y"), (2, "x")), lit(("x",), ("y",)))
    assert ev(e).rows() == [(1,)]


def test_sym_diff_examples():
    a = Relation.unary([1, 2])
    b = Relation.unary([2, 3])
    assert sym_diff(a, b).rows() == [(1,), (3,)]
    assert len(sym_diff(a, a)) == 0
    assert sym_diff(Relation.unary([]), b).tuples == b.tuples


def test_sym_diff_arity_mismatch():
    with pytest.raises(ArityError):
        sym_diff(Relation.unary([1]), Relation.unnamed(2, [(1, 2)]))


def test_union_arity_mismatch_is_an_error():
    with pytest.raises(RelAlgError):
        ev(Union_(lit((1,)), lit((1, 2))))


def test_unknown_relation():
    with pytest.raises(UnknownRelation):
        ev(BaseRel("NOPE"))
    with pytest.raises(RelAlgError):
        ev(GuessedRel("Q"))


def test_ambiguous_attribute_in_predicate():
    db = Database({"A": Relation(("x",), [(1,)]), "B": Relation(("x",), [(1,)])})
    with pytest.raises(RelAlgError):
        evaluate(Select(Product(BaseRel("A"), BaseRel("B")), C("x", "=", 1)), db)


def test_product_qualifies_with_alias():
    db = Database({"EDGES": Relation(("from", "to"), [(1, 2), (2, 3)])})
    e = Select(Product(BaseRel("EDGES", "e1"), BaseRel("EDGES", "e2")), C("e1.to", "=", "e2.from"))
    assert evaluate(e, db).rows() == [(1, 2, 2, 3)]


def test_dom_power_node_and_difference_streaming():
    db = Database({"R": Relation.unnamed(1, [(i,) for i in range(30)])})
    # DOM^4 has 810000 tuples; the difference only keeps those outside a tiny relation
    e = Difference(DomPower(4), Literal(Relation.unnamed(4, [(0, 0, 0, 0)])))
    assert len(evaluate(Select(e, C("$1", "=", 29)), db)) == 30**3


def test_let_and_ref():
    e = Let("X", lit((1,), (2,)), Difference(Ref("X"), lit((1,))))
    assert ev(e).rows() == [(2,)]


def test_rename():
    e = Rename(lit((1, 2)), (("$1", "a"), ("$2", "b")))
    r = ev(e)
    assert r.schema == ("a", "b")


def test_infer_arity():
    assert infer_arity(Product(DomPower(2), GuessedRel("Q")), {}, {"Q": 3}) == 5
    with pytest.raises(RelAlgError):
        infer_arity(Union_(DomPower(1), DomPower(2)), {}, {})


small = st.frozensets(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=8)


@settings(max_examples=150, deadline=None)
@given(small, small)
def test_algebraic_identities(a, b):
    A, B = Literal(Relation.unnamed(2, a)), Literal(Relation.unnamed(2, b))
    p = C("$1", "<", "$2")
    assert ev(Difference(A, Difference(A, B))).tuples == ev(Intersect(A, B)).tuples
    assert ev(Select(Union_(A, B), p)).tuples == ev(Union_(Select(A, p), Select(B, p))).tuples
    assert ev(Project(Union_(A, B), ("$1",))).tuples == ev(Union_(Project(A, ("$1",)), Project(B, ("$1",)))).tuples
    assert (len(ev(SymDiff(A, B))) == 0) == (a == b)


@settings(max_examples=150, deadline=None)
@given(small, small)
def test_join_matches_product_select(a, b):
    A, B = Literal(Relation.unnamed(2, a)), Literal(Relation.unnamed(2, b))
    # join comparisons read the left operand from the left input, the right from the right
    direct = ev(Join(A, B, conj(C("$2", "=", "$1"), C("$1", "!=", "$2"))))
    derived = ev(Select(Product(A, B), conj(C("$2", "=", "$3"), C("$1", "!=", "$4"))))
    assert direct.tuples == derived.tuples


@settings(max_examples=100, deadline=None)
@given(small, st.frozensets(st.tuples(st.integers(0, 3)), min_size=1, max_size=4))
def test_divide_brute_force(a, b):
    q = divide(Relation.unnamed(2, a), Relation.unnamed(1, b))
    lefts = {t[0] for t in a}
    expected = {(x,) for x in lefts if all((x, u[0]) in a for u in b)}
    assert set(q.tuples) == expected


@settings(max_examples=50, deadline=None)
@given(small)
def test_evaluation_is_referentially_transparent(a):
    e = Difference(Product(DomPower(1), DomPower(1)), Literal(Relation.unnamed(2, a)))
    db = Database({"R": Relation.unnamed(2, a | {(0, 3)})})
    assert evaluate(e, db) == evaluate(e, db)
