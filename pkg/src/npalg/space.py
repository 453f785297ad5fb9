"""Shaped search spaces shared by the specification language and the solvers.

A state is a tuple with one entry per component.  Component states are
tuples of small integers:

subset        0/1 per universe row
function      value index per domain row; -1 marks an unassigned row of a
              partial function
permutation   a permutation of range(N); row i gets value state[i] + 1
partition     block index per row; row i lands in block state[i] + 1
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

SHAPES = ("subset", "function", "permutation", "partition")


@dataclass(frozen=True, order=False)
class Cost:
    violations: int
    objective: Optional[int] = None
    maximize: bool = False

    def key(self) -> tuple:
        obj = 0 if self.objective is None else (-self.objective if self.maximize else self.objective)
        return (self.violations, obj)

    @property
    def feasible(self) -> bool:
        return self.violations == 0

    def __lt__(self, other: "Cost") -> bool:
        return self.key() < other.key()

    def __le__(self, other: "Cost") -> bool:
        return self.key() <= other.key()

    def to_json(self) -> dict:
        return {"violations": self.violations, "objective": self.objective}


@dataclass(frozen=True)
class Move:
    component: int
    kind: str  # flip, assign, unassign, swap, move
    pos: tuple  # touched positions
    value: int = 0

    def attributes(self) -> tuple:
        return tuple((self.component, p) for p in self.pos)


@dataclass(frozen=True)
class Component:
    name: str
    kind: str
    domain: tuple  # rows of the universe / domain
    values: tuple = ()  # function range values, each a tuple
    total: bool = True
    blocks: int = 0  # partition only
    columns: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise ValueError(f"unknown shape {self.kind!r}")
        if self.kind == "function" and self.total and self.domain and not self.values:
            raise ValueError(f"{self.name}: total function with an empty range")
        if self.kind == "partition" and self.blocks < 1:
            raise ValueError(f"{self.name}: a partition needs at least one block")

    @property
    def n(self) -> int:
        return len(self.domain)

    def size(self) -> int:
        if self.kind == "subset":
            return 2**self.n
        if self.kind == "function":
            return (len(self.values) + (0 if self.total else 1)) ** self.n
        if self.kind == "permutation":
            return math.factorial(self.n)
        return self.blocks**self.n

    def states(self) -> Iterator[tuple]:
        if self.kind == "subset":
            yield from itertools.product((0, 1), repeat=self.n)
        elif self.kind == "function":
            opts = list(range(len(self.values)))
            if not self.total:
                opts = [-1] + opts
            yield from itertools.product(opts, repeat=self.n)
        elif self.kind == "permutation":
            yield from itertools.permutations(range(self.n))
        else:
            yield from itertools.product(range(self.blocks), repeat=self.n)

    def random(self, rng) -> tuple:
        n = self.n
        if self.kind == "subset":
            return tuple(int(b) for b in rng.integers(0, 2, size=n))
        if self.kind == "function":
            k = len(self.values)
            if self.total:
                return tuple(int(v) for v in rng.integers(0, k, size=n)) if k else ()
            return tuple(int(v) - 1 for v in rng.integers(0, k + 1, size=n))
        if self.kind == "permutation":
            return tuple(int(v) for v in rng.permutation(n))
        return tuple(int(v) for v in rng.integers(0, self.blocks, size=n))

    def valid(self, s: tuple) -> bool:
        if len(s) != self.n:
            return False
        if self.kind == "subset":
            return all(b in (0, 1) for b in s)
        if self.kind == "function":
            lo = 0 if self.total else -1
            return all(lo <= v < len(self.values) for v in s)
        if self.kind == "permutation":
            return sorted(s) == list(range(self.n))
        return all(0 <= v < self.blocks for v in s)

    def moves(self, ci: int, s: tuple) -> list[Move]:
        out: list[Move] = []
        if self.kind == "subset":
            out = [Move(ci, "flip", (i,)) for i in range(self.n)]
        elif self.kind == "function":
            k = len(self.values)
            for i, cur in enumerate(s):
                for v in range(k):
                    if v != cur:
                        out.append(Move(ci, "assign", (i,), v))
                if not self.total and cur != -1:
                    out.append(Move(ci, "unassign", (i,), -1))
        elif self.kind == "permutation":
            out = [Move(ci, "swap", (i, j)) for i in range(self.n) for j in range(i + 1, self.n)]
        else:
            for i, cur in enumerate(s):
                out += [Move(ci, "move", (i,), b) for b in range(self.blocks) if b != cur]
        return out

    def apply(self, s: tuple, m: Move) -> tuple:
        lst = list(s)
        if m.kind == "flip":
            lst[m.pos[0]] ^= 1
        elif m.kind == "swap":
            i, j = m.pos
            lst[i], lst[j] = lst[j], lst[i]
        else:
            lst[m.pos[0]] = m.value
        return tuple(lst)

    def rows(self, s: tuple) -> list[tuple]:
        if self.kind == "subset":
            return [d for d, b in zip(self.domain, s) if b]
        if self.kind == "function":
            return [d + self.values[v] for d, v in zip(self.domain, s) if v >= 0]
        return [d + (v + 1,) for d, v in zip(self.domain, s)]


def space_size(components) -> int:
    out = 1
    for c in components:
        out *= c.size()
    return out


def all_states(components) -> Iterator[tuple]:
    return itertools.product(*(c.states() for c in components))


def random_state(components, rng) -> tuple:
    return tuple(c.random(rng) for c in components)


def neighborhood(components, state) -> list[Move]:
    out: list[Move] = []
    for ci, (c, s) in enumerate(zip(components, state)):
        out += c.moves(ci, s)
    return out


def apply_move(components, state, m: Move) -> tuple:
    lst = list(state)
    lst[m.component] = components[m.component].apply(state[m.component], m)
    return tuple(lst)


def state_valid(components, state) -> bool:
    return len(state) == len(components) and all(c.valid(s) for c, s in zip(components, state))
