"""NP-Alg: relational algebra with guessed relations, and a solver stack for it.

A query guesses relations over powers of the active domain and states a
FAIL expression; an instance is a yes-instance iff some guess makes FAIL
empty.  The package evaluates such queries, decides them exactly or by
local search, recognizes fragments decidable through 2SAT, translates
first-order and ESO formulas into the algebra, and runs specifications
written in an SQL-based constraint language.
"""
from .engine import GuessDecl, NpAlgQuery, check, solve_exact
from .relation import Database, Relation

__version__ = "0.1.0"

__all__ = ["Database", "GuessDecl", "NpAlgQuery", "Relation", "check", "solve_exact"]
