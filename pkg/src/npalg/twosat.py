"""2SAT via the implication graph and strongly connected components."""
from __future__ import annotations

from dataclasses import dataclass

Literal2 = tuple  # (variable index, positive?)


@dataclass(frozen=True)
class TwoSatInstance:
    num_vars: int
    clauses: tuple  # ((lit, lit), ...); unit clauses repeat their literal

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple((tuple(a), tuple(b)) for a, b in self.clauses))
        for a, b in self.clauses:
            for v, _ in (a, b):
                if not 0 <= v < self.num_vars:
                    raise ValueError(f"variable {v} out of range for {self.num_vars} variables")

    def satisfied_by(self, assignment) -> bool:
        return all(assignment[a[0]] == a[1] or assignment[b[0]] == b[1] for a, b in self.clauses)


def _node(lit: Literal2) -> int:
    v, pos = lit
    return 2 * v + (0 if pos else 1)


def solve_2sat(inst: TwoSatInstance) -> list[bool] | None:
    """A satisfying assignment, or None when the clauses are contradictory."""
    n = 2 * inst.num_vars
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in inst.clauses:
        # (a ∨ b) gives ¬a → b and ¬b → a
        adj[_node(a) ^ 1].append(_node(b))
        adj[_node(b) ^ 1].append(_node(a))

    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(adj[v]):
                work[-1] = (v, i + 1)
                w = adj[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1

    out = []
    for v in range(inst.num_vars):
        if comp[2 * v] == comp[2 * v + 1]:
            return None
        # Tarjan numbers components in reverse topological order
        out.append(comp[2 * v] < comp[2 * v + 1])
    return out
