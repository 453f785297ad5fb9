"""Hill climbing, tabu search and tandem runs over shaped search spaces.

A problem is anything with ``components`` (a tuple of ``space.Component``)
and ``cost(state) -> Cost``; ``has_objective`` marks optimization problems.
Costs compare lexicographically on (violations, signed objective).

Every random draw comes from a numpy ``SeedSequence`` derived from
``(seed, restart)`` for the initial state and ``(seed, restart, stage,
iteration)`` for the neighbor scanning order, so a run is a pure function of
its parameters no matter how restarts are spread over threads.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .algebra import Evaluator, Union_
from .engine import NpAlgQuery
from .relation import Database, Relation, dom_tuples
from .space import Component, Cost, apply_move, neighborhood, random_state, state_valid

STRATEGIES = ("hill", "tabu")


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SolverParams:
    seed: int = 0
    max_iters: int = 10_000
    restarts: int = 20
    tenure: int = 10
    max_idle: Optional[int] = None  # tabu: stop after this many iterations without a new best
    strategy: tuple = ("tabu",)
    workers: int = 1
    cache_size: int = 1 << 16
    assert_valid: bool = False  # re-check shape validity after every move

    def __post_init__(self):
        object.__setattr__(self, "strategy", tuple(s.lower() for s in self.strategy))
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.restarts < 1:
            raise ParameterError(f"restarts must be >= 1, got {self.restarts}")
        if self.tenure < 0:
            raise ParameterError(f"tenure must be >= 0, got {self.tenure}")
        if self.max_idle is not None and self.max_idle < 1:
            raise ParameterError(f"max_idle must be >= 1, got {self.max_idle}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if not self.strategy:
            raise ParameterError("no search strategy given")
        for s in self.strategy:
            if s not in STRATEGIES:
                raise ParameterError(f"unknown strategy {s!r}")


@dataclass
class RunTrace:
    restart: int
    stage: int
    strategy: str
    iterations: int
    costs: list  # cost keys of the accepted states, the start state first


@dataclass
class SearchResult:
    state: tuple
    cost: Cost
    restarts_used: int
    iterations: int
    seconds: float
    strategy: tuple
    traces: list = field(default_factory=list, repr=False)

    @property
    def answer(self) -> bool:
        return self.cost.feasible


class _Memo:
    """Bounded state -> cost cache; cleared wholesale when full."""

    def __init__(self, problem, size: int):
        self.problem = problem
        self.size = size
        self.data: dict = {}

    def __call__(self, state) -> Cost:
        c = self.data.get(state)
        if c is None:
            if len(self.data) >= self.size:
                self.data.clear()
            c = self.data[state] = self.problem.cost(state)
        return c


def _iter_rng(params: SolverParams, restart: int, stage: int, it: int):
    return np.random.default_rng(np.random.SeedSequence([params.seed, restart, stage, it]))


def initial_state(problem, rng) -> tuple:
    return random_state(problem.components, rng)


def _initial(problem, params: SolverParams, restart: int) -> tuple:
    return initial_state(problem, np.random.default_rng(np.random.SeedSequence([params.seed, restart])))


def _done(problem, cost: Cost) -> bool:
    return cost.feasible and not getattr(problem, "has_objective", False)


def _scan(problem, state, params, restart, stage, it):
    comps = problem.components
    moves = neighborhood(comps, state)
    order = _iter_rng(params, restart, stage, it).permutation(len(moves)) if moves else []
    return [moves[i] for i in order]


def _hill(problem, params, restart, stage, state, cost_fn):
    comps = problem.components
    cur, cur_cost = state, cost_fn(state)
    trace = [cur_cost.key()]
    it = 0
    while it < params.max_iters and not _done(problem, cur_cost):
        best = best_cost = None
        for m in _scan(problem, cur, params, restart, stage, it):
            nxt = apply_move(comps, cur, m)
            c = cost_fn(nxt)
            if best_cost is None or c < best_cost:
                best, best_cost = nxt, c
        it += 1
        if best is None or not best_cost < cur_cost:
            break
        if params.assert_valid:
            assert state_valid(comps, best), "move broke shape validity"
        cur, cur_cost = best, best_cost
        trace.append(cur_cost.key())
    return cur, cur_cost, it, trace


def _tabu(problem, params, restart, stage, state, cost_fn):
    comps = problem.components
    cur, cur_cost = state, cost_fn(state)
    best, best_cost = cur, cur_cost
    trace = [cur_cost.key()]
    tabu_until: dict = {}
    idle = 0
    it = 0
    while it < params.max_iters and not _done(problem, best_cost):
        pick = pick_cost = pick_move = None
        for m in _scan(problem, cur, params, restart, stage, it):
            nxt = apply_move(comps, cur, m)
            c = cost_fn(nxt)
            tabu = any(tabu_until.get(a, -1) >= it for a in m.attributes())
            if tabu and not c < best_cost:
                continue
            if pick_cost is None or c < pick_cost:
                pick, pick_cost, pick_move = nxt, c, m
        if pick is None:
            break
        if params.tenure:
            for a in pick_move.attributes():
                tabu_until[a] = it + params.tenure
        it += 1
        if params.assert_valid:
            assert state_valid(comps, pick), "move broke shape validity"
        cur, cur_cost = pick, pick_cost
        trace.append(cur_cost.key())
        if cur_cost < best_cost:
            best, best_cost = cur, cur_cost
            idle = 0
        else:
            idle += 1
            if params.max_idle is not None and idle >= params.max_idle:
                break
    return best, best_cost, it, trace


_RUNNERS = {"hill": _hill, "tabu": _tabu}


def _restart(problem, params: SolverParams, restart: int):
    """Run the strategy chain once; returns (state, cost, iterations, traces)."""
    cost_fn = _Memo(problem, params.cache_size)
    state = _initial(problem, params, restart)
    best = best_cost = None
    total = 0
    traces = []
    for stage, name in enumerate(params.strategy):
        state, c, its, costs = _RUNNERS[name](problem, params, restart, stage, state, cost_fn)
        total += its
        traces.append(RunTrace(restart, stage, name, its, costs))
        if best_cost is None or c < best_cost:
            best, best_cost = state, c
        if _done(problem, best_cost):
            break
    return best, best_cost, total, traces


def run(problem, params: SolverParams) -> SearchResult:
    """All restarts of ``params.strategy``; decision problems stop at the first feasible restart."""
    start = time.perf_counter()
    results = []
    stop = False
    if params.workers == 1:
        for r in range(params.restarts):
            results.append(_restart(problem, params, r))
            if _done(problem, results[-1][1]):
                break
    else:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            for lo in range(0, params.restarts, params.workers):
                batch = range(lo, min(lo + params.workers, params.restarts))
                for res in pool.map(lambda r: _restart(problem, params, r), batch):
                    if stop:
                        break  # logical run already ended; discard surplus restarts
                    results.append(res)
                    stop = _done(problem, res[1])
                if stop:
                    break
    best_i = 0
    for i, res in enumerate(results):
        if res[1] < results[best_i][1]:
            best_i = i
    state, cost = results[best_i][0], results[best_i][1]
    return SearchResult(
        state=state,
        cost=cost,
        restarts_used=len(results),
        iterations=sum(r[2] for r in results),
        seconds=time.perf_counter() - start,
        strategy=params.strategy,
        traces=[t for r in results for t in r[3]],
    )


def _with_strategy(params: SolverParams, strategy: Sequence[str]) -> SolverParams:
    return replace(params, strategy=tuple(strategy))


def hill_climb(problem, params: SolverParams | None = None) -> SearchResult:
    return run(problem, _with_strategy(params or SolverParams(), ("hill",)))


def tabu_search(problem, params: SolverParams | None = None) -> SearchResult:
    return run(problem, _with_strategy(params or SolverParams(), ("tabu",)))


def tandem(problem, params: SolverParams | None = None, strategies: Sequence[str] = ("hill", "tabu")) -> SearchResult:
    """Strategies run in sequence, each starting from its predecessor's best state."""
    if len(strategies) < 2:
        raise ParameterError("a tandem run needs at least two strategies")
    return run(problem, _with_strategy(params or SolverParams(), strategies))


def cost(problem, state) -> Cost:
    return problem.cost(state)


# -------------------------------------------------------------- NP-Alg adapter


def _union_operands(e) -> list:
    if isinstance(e, Union_):
        return _union_operands(e.left) + _union_operands(e.right)
    return [e]


class NpAlgProblem:
    """Local-search view of an NP-Alg query: one subset component per guess.

    The violation count is the summed size of the top-level union operands
    of FAIL, so it is zero exactly when FAIL is empty but still grades
    partial progress.
    """

    has_objective = False

    def __init__(self, query: NpAlgQuery, db: Database):
        query.validate(db)
        self.query = query
        self.db = db
        values = db.dom_values()
        self.components = tuple(
            Component(g.name, "subset", tuple(dom_tuples(values, g.arity)) if values else ())
            for g in query.guesses
        )
        self.operands = _union_operands(query.fail)

    def witness(self, state) -> dict[str, Relation]:
        return {
            g.name: Relation.unnamed(g.arity, comp.rows(s))
            for g, comp, s in zip(self.query.guesses, self.components, state)
        }

    def cost(self, state) -> Cost:
        ev = Evaluator(self.db, self.witness(state))
        env: dict = {}
        for name, e in self.query.lets:
            env[name] = ev.eval(e, dict(env))
        return Cost(sum(len(ev.eval(op, dict(env))) for op in self.operands))
