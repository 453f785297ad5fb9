import itertools

import pytest

from npalg.algebra import DomPower, Select, evaluate, walk
from npalg.circuit import (
    Circuit,
    CircuitError,
    adjacency_circuit,
    brute_force_3col,
    circuit_only_query,
    dom01,
    eval_circuit,
    expanded_edges,
    fail_gate,
    forced_gate_extension,
    gen_succinct_3col,
    solve_succinct_3col,
    succinct_database,
)
from npalg.engine import BudgetExhausted, check, search_exact

import circuit_cases

AND_OF_INPUTS = Circuit(1, (("IN", 0, 0), ("IN", 0, 0), ("AND", 1, 2)))
NOT_FIRST = Circuit(1, (("IN", 0, 0), ("IN", 0, 0), ("NOT", 1, 1)))


def test_eval_and_gate():
    assert eval_circuit(AND_OF_INPUTS, (1, 1))
    assert not eval_circuit(AND_OF_INPUTS, (1, 0))


def test_eval_not_gate():
    assert not eval_circuit(NOT_FIRST, (1, 0))
    assert eval_circuit(NOT_FIRST, (0, 1))


def test_eval_wrong_bit_count():
    with pytest.raises(CircuitError):
        eval_circuit(AND_OF_INPUTS, (1,))


def test_path_adjacency_circuit():
    # path 0-1-2-3 over 2-bit node names
    names = list(itertools.product((0, 1), repeat=2))
    path = {(names[i], names[i + 1]) for i in range(3)}
    path |= {(b, a) for a, b in path}
    c = adjacency_circuit(2, path)
    assert eval_circuit(c, names[1] + names[2])
    assert not eval_circuit(c, names[0] + names[3])
    assert expanded_edges(c) == path


@pytest.mark.parametrize(
    "gates",
    [
        (("IN", 0, 0), ("AND", 1, 3), ("IN", 0, 0)),
        (("IN", 0, 0), ("IN", 0, 0), ("NOT", 1, 2)),
        (("IN", 1, 0), ("IN", 0, 0), ("AND", 1, 2)),
        (("IN", 0, 0), ("IN", 0, 0), ("XOR", 1, 2)),
        (("IN", 0, 0), ("AND", 1, 1)),
    ],
)
def test_malformed_circuits(gates):
    with pytest.raises(CircuitError):
        Circuit(1, gates)


def test_json_round_trip_and_errors():
    assert Circuit.from_json(AND_OF_INPUTS.to_json()) == AND_OF_INPUTS
    with pytest.raises(CircuitError):
        Circuit.from_json('{"gates": []}')


def test_guess_count_is_gates_plus_three():
    q = gen_succinct_3col(AND_OF_INPUTS)
    assert len(q.guesses) == 3 + 3
    assert [g.arity for g in q.guesses] == [2, 2, 2, 1, 1, 1]


def test_input_gate_expression_selects_bit():
    e = fail_gate(AND_OF_INPUTS, 2)
    assert any(isinstance(n, Select) and getattr(n.pred, "left", None) is not None and n.pred.left.ref == "$2" for n in walk(e))


def test_dom01_has_two_tuples():
    assert evaluate(dom01(), succinct_database()).rows() == [(0,), (1,)]


def test_forced_extension_examples():
    forced = forced_gate_extension(AND_OF_INPUTS)
    assert forced["G3"].rows() == [(1, 1)]
    assert forced_gate_extension(NOT_FIRST)["G3"].rows() == [(0, 0), (0, 1)]
    with pytest.raises(CircuitError):
        forced_gate_extension(Circuit(5, tuple([("IN", 0, 0)] * 10)))


def test_gate_space_is_beyond_enumeration():
    # |DOM| = 6, so one arity-2 gate relation alone has 2^36 extensions
    q = circuit_only_query(AND_OF_INPUTS)
    with pytest.raises(BudgetExhausted):
        search_exact(q, succinct_database(), budget=50)


def test_forced_extension_solves_the_circuit_query():
    q = circuit_only_query(AND_OF_INPUTS)
    assert check(q, succinct_database(), forced_gate_extension(AND_OF_INPUTS))


@pytest.mark.parametrize("name,circuit", circuit_cases.cases()[:4], ids=[n for n, _ in circuit_cases.cases()[:4]])
def test_circuit_pipeline(name, circuit):
    assert circuit_cases.fail_circuit_empty(circuit, forced_gate_extension(circuit))
    assert circuit_cases.perturbation_failures(circuit) == []
    assert circuit_cases.decision_agrees(circuit)


def test_witness_checks_against_full_query():
    c = circuit_cases.differ_first_bit()
    w = solve_succinct_3col(c)
    assert w is not None and check(gen_succinct_3col(c), succinct_database(), w)


def test_k4_is_not_three_colorable():
    c = circuit_cases.all_distinct()
    nodes = list(itertools.product((0, 1), repeat=2))
    assert not brute_force_3col(nodes, expanded_edges(c))
    assert solve_succinct_3col(c) is None
