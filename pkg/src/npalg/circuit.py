"""Boolean circuits as succinct graphs, and their 3-coloring query.

A circuit with ``2n`` inputs describes a graph whose nodes are the bit
vectors in {0,1}^n: nodes X and Y are adjacent iff the circuit outputs 1 on
the concatenation X + Y.  ``gen_succinct_3col`` builds the query with one
guessed relation per gate plus three colour classes.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .algebra import (
    C,
    DomPower,
    Expr,
    GuessedRel,
    Intersect,
    Product,
    Project,
    Select,
    SymDiff,
    Union_,
    Difference,
    Val,
    conj,
    disj,
    union_all,
)
from .engine import GuessDecl, NpAlgQuery, check
from .relation import Database, Relation, RelAlgError
from .sugar import build_fail_partition

GATE_KINDS = ("AND", "OR", "NOT", "IN")
MAX_SWEEP_N = 4


class CircuitError(RelAlgError):
    pass


@dataclass(frozen=True)
class Circuit:
    """Gates ``(kind, b, c)`` with 1-based references to earlier gates."""

    n: int
    gates: tuple

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple((str(k).upper(), int(b), int(c)) for k, b, c in self.gates))
        if self.n < 1:
            raise CircuitError("a circuit needs n >= 1")
        if not self.gates:
            raise CircuitError("a circuit needs at least one gate")
        inputs = 0
        for i, (kind, b, c) in enumerate(self.gates, start=1):
            if kind not in GATE_KINDS:
                raise CircuitError(f"gate {i}: unknown kind {kind!r}")
            if kind == "IN":
                inputs += 1
                if b != 0 or c != 0:
                    raise CircuitError(f"gate {i}: input gates take b = c = 0")
                continue
            if not (1 <= b < i and 1 <= c < i):
                raise CircuitError(f"gate {i}: inputs ({b}, {c}) must refer to earlier gates")
            if kind == "NOT" and b != c:
                raise CircuitError(f"gate {i}: NOT gates need b = c")
        if inputs != 2 * self.n:
            raise CircuitError(f"circuit has {inputs} input gates, expected {2 * self.n}")

    @property
    def k(self) -> int:
        return len(self.gates)

    def input_index(self) -> dict[int, int]:
        """Gate number -> 1-based input position."""
        out, j = {}, 0
        for i, (kind, _, _) in enumerate(self.gates, start=1):
            if kind == "IN":
                j += 1
                out[i] = j
        return out

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "gates": [list(g) for g in self.gates]})

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        try:
            data = json.loads(text)
            return cls(int(data["n"]), tuple(tuple(g) for g in data["gates"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise CircuitError(f"malformed circuit: {exc}") from None


def gate_values(c: Circuit, bits: Sequence[int]) -> list[int]:
    if len(bits) != 2 * c.n:
        raise CircuitError(f"expected {2 * c.n} input bits, got {len(bits)}")
    vals: list[int] = []
    j = 0
    for kind, b, cc in c.gates:
        if kind == "IN":
            vals.append(1 if bits[j] else 0)
            j += 1
        elif kind == "AND":
            vals.append(vals[b - 1] & vals[cc - 1])
        elif kind == "OR":
            vals.append(vals[b - 1] | vals[cc - 1])
        else:
            vals.append(1 - vals[b - 1])
    return vals


def eval_circuit(c: Circuit, bits: Sequence[int]) -> bool:
    return bool(gate_values(c, bits)[-1])


def expanded_edges(c: Circuit) -> set[tuple[tuple, tuple]]:
    """The explicit edge set the circuit describes."""
    out = set()
    for bits in itertools.product((0, 1), repeat=2 * c.n):
        if eval_circuit(c, bits):
            out.add((bits[: c.n], bits[c.n :]))
    return out


def adjacency_circuit(n: int, edges: set[tuple[tuple, tuple]]) -> Circuit:
    """A DNF circuit that outputs 1 exactly on the given (X, Y) pairs."""
    gates: list[tuple] = [("IN", 0, 0)] * (2 * n)
    neg = {}
    for j in range(1, 2 * n + 1):
        gates.append(("NOT", j, j))
        neg[j] = len(gates)
    terms = []
    for x, y in sorted(edges):
        lits = [j if bit else neg[j] for j, bit in enumerate(tuple(x) + tuple(y), start=1)]
        acc = lits[0]
        for lit in lits[1:]:
            gates.append(("AND", acc, lit))
            acc = len(gates)
        terms.append(acc)
    if not terms:
        # x1 AND NOT x1 is constantly false
        gates.append(("AND", 1, neg[1]))
        terms.append(len(gates))
    acc = terms[0]
    for t in terms[1:]:
        gates.append(("OR", acc, t))
        acc = len(gates)
    if acc != len(gates):
        gates.append(("OR", acc, acc))
    return Circuit(n, tuple(gates))


# ---------------------------------------------------------------- the query


def succinct_database() -> Database:
    """DOM = {0, 1} plus the four gate-kind constants."""
    return Database(
        {
            "BIT": Relation(("b",), {(0,), (1,)}),
            "GATEKIND": Relation(("kind",), {(k,) for k in GATE_KINDS}),
        }
    )


def dom01() -> Expr:
    return Select(DomPower(1), conj(*(C("$1", "!=", Val(k)) for k in GATE_KINDS)))


def dom01_power(k: int) -> Expr:
    out = dom01()
    for _ in range(k - 1):
        out = Product(out, dom01())
    return out


def gate_name(i: int) -> str:
    return f"G{i}"


def col_name(i: int) -> str:
    return f"COL{i}"


def _first(e: Expr) -> Expr:
    return Project(e, ("$1",))


def fail_gate(c: Circuit, i: int) -> Expr:
    kind, b, cc = c.gates[i - 1]
    g = GuessedRel(gate_name(i))
    if kind == "AND":
        rhs = Intersect(GuessedRel(gate_name(b)), GuessedRel(gate_name(cc)))
    elif kind == "OR":
        rhs = Union_(GuessedRel(gate_name(b)), GuessedRel(gate_name(cc)))
    elif kind == "NOT":
        rhs = Difference(dom01_power(2 * c.n), GuessedRel(gate_name(b)))
    else:
        j = c.input_index()[i]
        rhs = Select(dom01_power(2 * c.n), C(f"${j}", "=", Val(1)))
    return SymDiff(g, rhs)


def fail_circuit(c: Circuit) -> Expr:
    return union_all([_first(fail_gate(c, i)) for i in range(1, c.k + 1)])


def fail_coloring(c: Circuit) -> Expr:
    n = c.n
    distinct = disj(*(C(f"${i}", "!=", f"${n + i}") for i in range(1, n + 1)))
    edges = GuessedRel(gate_name(c.k))
    parts = []
    for i in (1, 2, 3):
        col = GuessedRel(col_name(i))
        parts.append(_first(Intersect(Select(Product(col, col), distinct), edges)))
    return union_all(parts)


def gen_succinct_3col(c: Circuit) -> NpAlgQuery:
    guesses = [GuessDecl(gate_name(i), 2 * c.n) for i in range(1, c.k + 1)]
    guesses += [GuessDecl(col_name(i), c.n) for i in (1, 2, 3)]
    partition = build_fail_partition(dom01_power(c.n), [GuessedRel(col_name(i)) for i in (1, 2, 3)], c.n)
    fail = union_all([fail_circuit(c), partition, fail_coloring(c)])
    return NpAlgQuery(tuple(guesses), fail, name="succinct-3-coloring")


def circuit_only_query(c: Circuit) -> NpAlgQuery:
    guesses = [GuessDecl(gate_name(i), 2 * c.n) for i in range(1, c.k + 1)]
    return NpAlgQuery(tuple(guesses), fail_circuit(c), name="circuit")


def forced_gate_extension(c: Circuit, db: Database | None = None) -> dict[str, Relation]:
    """G_i = the 2n-bit inputs on which gate i outputs 1, by truth-table sweep."""
    if c.n > MAX_SWEEP_N:
        raise CircuitError(f"n = {c.n} is too large for a truth-table sweep (max {MAX_SWEEP_N})")
    rows: list[set] = [set() for _ in c.gates]
    for bits in itertools.product((0, 1), repeat=2 * c.n):
        for i, v in enumerate(gate_values(c, bits)):
            if v:
                rows[i].add(bits)
    return {gate_name(i + 1): Relation.unnamed(2 * c.n, r) for i, r in enumerate(rows)}


def coloring_witness(c: Circuit, colour: Mapping[tuple, int]) -> dict[str, Relation]:
    return {
        col_name(k): Relation.unnamed(c.n, (node for node, v in colour.items() if v == k))
        for k in (1, 2, 3)
    }


def solve_succinct_3col(c: Circuit) -> dict[str, Relation] | None:
    """Decide the generated query with gates forced and colourings enumerated.

    Any extension with FAIL = ∅ has COL1..3 partitioning {0,1}^n, so scanning
    every map from nodes to three colours covers all candidate solutions.
    """
    q = gen_succinct_3col(c)
    db = succinct_database()
    gates = forced_gate_extension(c)
    nodes = list(itertools.product((0, 1), repeat=c.n))
    for assignment in itertools.product((1, 2, 3), repeat=len(nodes)):
        w = dict(gates)
        w.update(coloring_witness(c, dict(zip(nodes, assignment))))
        if check(q, db, w):
            return w
    return None


def brute_force_3col(nodes: Sequence, edges: set) -> bool:
    nodes = list(nodes)
    for assignment in itertools.product(range(3), repeat=len(nodes)):
        col = dict(zip(nodes, assignment))
        if all(x == y or col[x] != col[y] for x, y in edges):
            return True
    return False
