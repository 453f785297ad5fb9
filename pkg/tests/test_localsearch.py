import pytest

from conftest import graph_db, reference_db
from npalg.consql import lower_spec, parse_spec
from npalg.engine import check
from npalg.fixtures import fixture, spec_path
from npalg.localsearch import (
    NpAlgProblem,
    ParameterError,
    SolverParams,
    hill_climb,
    run,
    tabu_search,
    tandem,
)
from npalg.relation import Database, Relation
from npalg.space import state_valid


def coloring_spec():
    return parse_spec(spec_path("graph_coloring.sql").read_text(encoding="utf-8"))


def spec_problem(nodes, edges, colors):
    db = Database(
        {
            "NODES": Relation(("n",), [(n,) for n in nodes]),
            "EDGES": Relation(("f", "t"), edges),
            "COLORS": Relation(("id", "name"), [(c, f"c{c}") for c in colors]),
        }
    )
    return lower_spec(coloring_spec(), db)


@pytest.fixture(scope="module")
def c5_two_colours():
    return spec_problem(range(1, 6), [(i, i % 5 + 1) for i in range(1, 6)], [1, 2])


def test_hill_solves_reference_instance(coloring_query):
    db = reference_db()
    p = NpAlgProblem(coloring_query, db)
    res = hill_climb(p, SolverParams(seed=0, restarts=10))
    assert res.answer
    assert check(coloring_query, db, p.witness(res.state))


def test_tabu_solves_spec_colouring():
    p = spec_problem([1, 2, 3, 4], [(1, 2), (1, 4), (2, 3)], [1, 2, 3])
    res = tabu_search(p, SolverParams(seed=0, restarts=5))
    assert res.answer
    assert all(ok for ok, _ in p.condition_results(res.state))


def test_c5_minimum_is_one_violation(c5_two_colours):
    res = tabu_search(c5_two_colours, SolverParams(seed=0, restarts=5, max_iters=200))
    assert not res.answer
    assert res.cost.violations == 1
    assert res.restarts_used == 5


def test_parameter_validation():
    with pytest.raises(ParameterError):
        SolverParams(max_iters=0)
    with pytest.raises(ParameterError):
        SolverParams(restarts=0)
    with pytest.raises(ParameterError):
        SolverParams(tenure=-1)
    with pytest.raises(ParameterError):
        SolverParams(workers=0)
    with pytest.raises(ParameterError):
        SolverParams(max_idle=0)
    with pytest.raises(ParameterError):
        SolverParams(strategy=("anneal",))
    with pytest.raises(ParameterError):
        SolverParams(strategy=())


def test_tandem_needs_two_strategies(c5_two_colours):
    with pytest.raises(ParameterError):
        tandem(c5_two_colours, SolverParams(), strategies=("tabu",))


def test_tenure_zero_is_allowed(c5_two_colours):
    res = tabu_search(c5_two_colours, SolverParams(tenure=0, restarts=2, max_iters=50))
    assert res.cost.violations == 1


def test_hill_trace_strictly_improves(c5_two_colours):
    res = hill_climb(c5_two_colours, SolverParams(seed=3, restarts=6))
    for t in res.traces:
        assert all(b < a for a, b in zip(t.costs, t.costs[1:]))


def test_tabu_best_never_worse_than_start(c5_two_colours):
    res = tabu_search(c5_two_colours, SolverParams(seed=1, restarts=4, max_iters=30))
    for t in res.traces:
        assert min(t.costs) <= t.costs[0]
    assert res.cost.key() == min(min(t.costs) for t in res.traces)


def test_tandem_runs_stages_in_order():
    f = fixture("consql-timetabling-toy")
    p = lower_spec(f.load_spec(), f.load_db())
    res = tandem(p, SolverParams(seed=0, restarts=2, max_idle=5))
    assert [t.strategy for t in res.traces[:2]] == ["hill", "tabu"]
    assert res.strategy == ("hill", "tabu")


def _fingerprint(res):
    return res.state, res.cost, res.restarts_used, res.iterations, [(t.restart, t.stage, t.costs) for t in res.traces]


def test_deterministic_across_runs_and_workers():
    f = fixture("consql-timetabling-toy")
    p = lower_spec(f.load_spec(), f.load_db())
    base = SolverParams(seed=0, restarts=8, max_idle=5, strategy=("tabu",))
    one = run(p, base)
    again = run(p, base)
    many = run(p, SolverParams(seed=0, restarts=8, max_idle=5, strategy=("tabu",), workers=4))
    assert _fingerprint(one) == _fingerprint(again) == _fingerprint(many)


def test_decision_workers_stop_at_same_restart(coloring_query):
    db = graph_db([1, 2, 3, 4, 5], [(1, 2), (2, 3), (3, 4), (4, 5)])
    p = NpAlgProblem(coloring_query, db)
    one = run(p, SolverParams(seed=2, restarts=12, strategy=("hill",)))
    four = run(p, SolverParams(seed=2, restarts=12, strategy=("hill",), workers=4))
    assert _fingerprint(one) == _fingerprint(four)


def test_feasible_states_pass_checks_and_stay_valid():
    f = fixture("consql-aircraft-two")
    p = lower_spec(f.load_spec(), f.load_db())
    res = tabu_search(p, SolverParams(seed=0, restarts=3, max_idle=5, assert_valid=True))
    assert res.answer
    assert state_valid(p.components, res.state)
    assert all(ok for ok, _ in p.condition_results(res.state))


def test_seed_changes_the_start(c5_two_colours):
    from npalg.localsearch import _initial

    starts = {_initial(c5_two_colours, SolverParams(seed=k), 0) for k in range(6)}
    assert len(starts) > 1
    assert _initial(c5_two_colours, SolverParams(seed=4), 0) == _initial(c5_two_colours, SolverParams(seed=4), 0)
