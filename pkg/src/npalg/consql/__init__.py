"""The specification language: parsing, printing, evaluation and lowering."""
from .ast import Script, Specification
from .bridge import UnsupportedConstruct, lower_to_npalg
from .lexer import ConSqlError, ParseError
from .model import (
    ExhaustiveResult,
    SearchProblem,
    eval_condition,
    eval_objective,
    eval_returns,
    lower_spec,
    script_tables,
    solve_exhaustive,
)
from .parser import parse_condition, parse_query, parse_script, parse_spec
from .printer import fmt_script, fmt_spec
from .sqleval import SemanticError, SqlTypeError, run_query

__all__ = [
    "ConSqlError",
    "ExhaustiveResult",
    "ParseError",
    "Script",
    "SearchProblem",
    "SemanticError",
    "Specification",
    "SqlTypeError",
    "UnsupportedConstruct",
    "eval_condition",
    "eval_objective",
    "eval_returns",
    "fmt_script",
    "fmt_spec",
    "lower_spec",
    "lower_to_npalg",
    "parse_condition",
    "parse_query",
    "parse_script",
    "parse_spec",
    "run_query",
    "script_tables",
    "solve_exhaustive",
]
