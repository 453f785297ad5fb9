"""Hand-built adjacency circuits with n <= 2 and the circuit pipeline checks."""
from __future__ import annotations

import itertools

from npalg.algebra import evaluate
from npalg.circuit import (
    Circuit,
    adjacency_circuit,
    brute_force_3col,
    expanded_edges,
    fail_circuit,
    forced_gate_extension,
    gate_name,
    solve_succinct_3col,
    succinct_database,
)
from npalg.fixtures import circuit_path
from npalg.relation import Relation


def _xor(gates, a, b):
    """Append gates for a XOR b; returns the output gate number."""
    gates.append(("NOT", a, a))
    na = len(gates)
    gates.append(("NOT", b, b))
    nb = len(gates)
    gates.append(("AND", a, nb))
    left = len(gates)
    gates.append(("AND", na, b))
    right = len(gates)
    gates.append(("OR", left, right))
    return len(gates)


def differ_first_bit() -> Circuit:
    """n=2: X adjacent to Y iff their first bits differ (K_{2,2})."""
    gates = [("IN", 0, 0)] * 4
    _xor(gates, 1, 3)
    return Circuit(2, tuple(gates))


def all_distinct() -> Circuit:
    """n=2: every pair of distinct nodes adjacent (K4)."""
    gates = [("IN", 0, 0)] * 4
    a = _xor(gates, 1, 3)
    b = _xor(gates, 2, 4)
    gates.append(("OR", a, b))
    return Circuit(2, tuple(gates))


def triangle_plus_isolated() -> Circuit:
    nodes = [(0, 0), (0, 1), (1, 0)]
    edges = {(x, y) for x in nodes for y in nodes if x != y}
    return adjacency_circuit(2, edges)


def no_edges() -> Circuit:
    return adjacency_circuit(1, set())


def cases() -> list[tuple[str, Circuit]]:
    out = [
        ("differ-first-bit", differ_first_bit()),
        ("all-distinct", all_distinct()),
        ("triangle-plus-isolated", triangle_plus_isolated()),
        ("no-edges", no_edges()),
    ]
    for name in ("and-of-inputs", "path-2", "k4"):
        out.append((name, Circuit.from_json(circuit_path(name).read_text())))
    return out


def fail_circuit_empty(c: Circuit, ext) -> bool:
    return len(evaluate(fail_circuit(c), succinct_database(), ext)) == 0


def perturbation_failures(c: Circuit) -> list:
    """Single-tuple flips of the forced extension that leave FAIL_CIRCUIT empty."""
    forced = forced_gate_extension(c)
    bad = []
    for i in range(1, c.k + 1):
        g = gate_name(i)
        for t in itertools.product((0, 1), repeat=2 * c.n):
            ext = dict(forced)
            ext[g] = Relation.unnamed(2 * c.n, set(forced[g].tuples) ^ {t})
            if fail_circuit_empty(c, ext):
                bad.append((g, t))
    return bad


def decision_agrees(c: Circuit) -> bool:
    nodes = list(itertools.product((0, 1), repeat=c.n))
    return (solve_succinct_3col(c) is not None) == brute_force_3col(nodes, expanded_edges(c))
