"""Tokenizer for the specification language."""
from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = {
    "CREATE", "SPECIFICATION", "GUESS", "TABLE", "AS", "MAXIMIZE", "MINIMIZE",
    "CHECK", "RETURN", "SELECT", "FROM", "WHERE", "AND", "OR", "NOT", "EXISTS",
    "IN", "UNION", "SUBSET", "OF", "TOTAL", "PARTIAL", "FUNCTION_TO",
    "PARTITION", "PERMUTATION", "COUNT", "SUM", "DISTINCT",
}


class ConSqlError(Exception):
    """Base class for specification-language errors."""


class ParseError(ConSqlError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # KW, IDENT, INT, STRING, OP, EOF
    value: object
    line: int
    col: int

    def is_kw(self, *words: str) -> bool:
        return self.kind == "KW" and self.value in words

    def is_op(self, *ops: str) -> bool:
        return self.kind == "OP" and self.value in ops


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:[^']|'')*')
  | (?P<op>\.\.|<>|!=|<=|>=|[()=<>,.*+\-/;])
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text.startswith("/*", pos):
                raise ParseError("unterminated comment", line, col)
            if text[pos] == "'":
                raise ParseError("unterminated string literal", line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group(kind)
        if kind == "int":
            tokens.append(Token("INT", int(raw), line, col))
        elif kind == "ident":
            up = raw.upper()
            tokens.append(Token("KW", up, line, col) if up in KEYWORDS else Token("IDENT", raw, line, col))
        elif kind == "string":
            tokens.append(Token("STRING", raw[1:-1].replace("''", "'"), line, col))
        elif kind == "op":
            tokens.append(Token("OP", "<>" if raw == "!=" else raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            line_start = pos + raw.rfind("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("EOF", None, line, col))
    return tokens
