"""Recursive-descent parser for specifications, queries and conditions."""
from __future__ import annotations

from dataclasses import replace

from .ast import (
    BOOL_NODES,
    Agg,
    BinOp,
    BoolAnd,
    BoolNot,
    BoolOr,
    Col,
    Compare,
    Exists,
    FunctionTo,
    GuessTable,
    InList,
    InQuery,
    IntRange,
    Lit,
    Neg,
    Objective,
    PartitionOf,
    PermutationOf,
    RangeTable,
    ReturnTable,
    ScalarQuery,
    Script,
    Select,
    SelectItem,
    Specification,
    SubqueryRef,
    SubsetOf,
    TableRef,
    UnionQuery,
)
from .lexer import ParseError, Token, tokenize

_COMPARE = ("=", "<>", "<", "<=", ">", ">=")
_SHAPE_START = ("SUBSET", "TOTAL", "PARTIAL", "FUNCTION_TO", "PARTITION", "PERMUTATION")


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.value)
        return ParseError(f"{message}, found {found}", tok.line, tok.col)

    def expect_kw(self, *words: str) -> Token:
        if not self.tok.is_kw(*words):
            raise self.error(f"expected {' or '.join(words)}")
        return self.advance()

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise self.error(f"expected {op!r}")
        return self.advance()

    def accept_kw(self, *words: str) -> bool:
        if self.tok.is_kw(*words):
            self.advance()
            return True
        return False

    def accept_op(self, op: str) -> bool:
        if self.tok.is_op(op):
            self.advance()
            return True
        return False

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "IDENT":
            raise self.error(f"expected {what}")
        return self.advance().value

    # -- top level
    def script(self) -> Script:
        specs, stmts = [], []
        while self.tok.kind != "EOF":
            if self.accept_op(";"):
                continue
            if self.tok.is_kw("CREATE"):
                specs.append(self.specification())
            elif self.tok.is_kw("SELECT") or self.tok.is_op("("):
                stmts.append(self.query())
            else:
                raise self.error("expected CREATE SPECIFICATION or SELECT")
        return Script(tuple(specs), tuple(stmts))

    def specification(self) -> Specification:
        self.expect_kw("CREATE")
        self.expect_kw("SPECIFICATION")
        name = self.ident("specification name")
        self.expect_op("(")
        guesses = []
        while self.tok.is_kw("GUESS"):
            guesses.append(self.guess())
        if not guesses:
            raise self.error("a specification needs at least one GUESS TABLE")
        objective = None
        if self.tok.is_kw("MINIMIZE", "MAXIMIZE"):
            direction = self.advance().value
            self.expect_op("(")
            objective = Objective(direction, self.query())
            self.expect_op(")")
        checks = []
        while self.tok.is_kw("CHECK"):
            start = self.advance()
            self.expect_op("(")
            cond = self.expr()
            if not isinstance(cond, BOOL_NODES):
                raise ParseError("CHECK needs a boolean condition", start.line, start.col)
            self.expect_op(")")
            checks.append(cond)
        if not checks:
            raise self.error("a specification needs at least one CHECK")
        returns = []
        while self.tok.is_kw("RETURN"):
            self.advance()
            self.expect_kw("TABLE")
            rname = self.ident("return table name")
            self.expect_kw("AS")
            returns.append(ReturnTable(rname, self.query()))
        self.expect_op(")")
        return Specification(name, tuple(guesses), objective, tuple(checks), tuple(returns))

    def guess(self) -> GuessTable:
        self.expect_kw("GUESS")
        self.expect_kw("TABLE")
        name = self.ident("guessed table name")
        aliases = None
        if self.accept_op("("):
            aliases = [self.ident("column alias")]
            while self.accept_op(","):
                aliases.append(self.ident("column alias"))
            self.expect_op(")")
            aliases = tuple(aliases)
        self.expect_kw("AS")
        if not self.tok.is_kw("SELECT"):
            raise self.error("a guessed table is defined by a SELECT")
        return GuessTable(name, aliases, self.select())

    # -- queries
    def query(self):
        left = self.query_term()
        while self.accept_kw("UNION"):
            left = UnionQuery(left, self.query_term())
        return left

    def query_term(self):
        if self.tok.is_op("(") and self.peek().is_kw("SELECT"):
            self.advance()
            q = self.query()
            self.expect_op(")")
            return q
        return self.select()

    def select(self) -> Select:
        self.expect_kw("SELECT")
        distinct = self.accept_kw("DISTINCT")
        if self.accept_op("*"):
            items = None
        else:
            items = [self.select_item()]
            while self.accept_op(","):
                items.append(self.select_item())
            items = tuple(items)
        self.expect_kw("FROM")
        from_ = self.from_list(allow_shaped=True)
        where = self.expr() if self.accept_kw("WHERE") else None
        return Select(items, from_, where, distinct)

    def select_item(self) -> SelectItem:
        e = self.expr()
        alias = None
        if self.accept_kw("AS"):
            alias = self.ident("column alias")
        elif self.tok.kind == "IDENT":
            alias = self.advance().value
        return SelectItem(e, alias)

    def from_list(self, allow_shaped: bool) -> tuple:
        items = []
        while True:
            if self.tok.is_kw(*_SHAPE_START):
                if not allow_shaped:
                    raise self.error("a guessable FROM item cannot appear here")
                # an unparenthesised shape takes the rest of the list as its source
                items.append(self.shaped(None))
                break
            items.append(self.from_item(allow_shaped))
            if not self.accept_op(","):
                break
        return tuple(items)

    def from_item(self, allow_shaped: bool):
        if self.tok.is_op("("):
            nxt = self.peek()
            if nxt.is_kw(*_SHAPE_START):
                if not allow_shaped:
                    raise self.error("a guessable FROM item cannot appear here", nxt)
                self.advance()
                inner = self.shaped(None)
                self.expect_op(")")
                alias = self.alias()
                return replace(inner, alias=alias)
            if nxt.is_kw("SELECT") or nxt.is_op("("):
                self.advance()
                q = self.query()
                self.expect_op(")")
                alias = self.alias()
                if alias is None:
                    raise self.error("a derived table needs an alias")
                return SubqueryRef(q, alias)
            raise self.error("expected a table, a subquery or a guessable FROM item", nxt)
        name = self.ident("table name")
        if self.tok.is_op(".") and self.peek().kind == "IDENT":
            self.advance()
            name = f"{name}.{self.advance().value}"
        return TableRef(name, self.alias())

    def alias(self):
        if self.accept_kw("AS"):
            return self.ident("alias")
        if self.tok.kind == "IDENT":
            return self.advance().value
        return None

    def shaped(self, alias):
        tok = self.tok
        if self.accept_kw("SUBSET"):
            self.expect_kw("OF")
            return SubsetOf(self.from_list(False), alias)
        if self.tok.is_kw("TOTAL", "PARTIAL", "FUNCTION_TO"):
            explicit = self.tok.is_kw("TOTAL")
            total = True
            if self.tok.is_kw("TOTAL", "PARTIAL"):
                total = self.advance().value == "TOTAL"
            self.expect_kw("FUNCTION_TO")
            self.expect_op("(")
            if self.tok.kind == "IDENT" and self.peek().is_op(")"):
                rng = RangeTable(self.advance().value)
            else:
                lo = self.additive()
                self.expect_op("..")
                hi = self.additive()
                rng = IntRange(lo, hi)
            self.expect_op(")")
            self.expect_kw("AS")
            fields = [self.ident("field name")]
            while self.accept_op(","):
                fields.append(self.ident("field name"))
            self.expect_kw("OF")
            return FunctionTo(rng, tuple(fields), self.from_list(False), total, alias, explicit)
        if self.accept_kw("PARTITION"):
            self.expect_op("(")
            n = self.additive()
            self.expect_op(")")
            self.expect_kw("AS")
            field = self.ident("field name")
            self.expect_kw("OF")
            return PartitionOf(n, field, self.from_list(False), alias)
        if self.accept_kw("PERMUTATION"):
            self.expect_kw("AS")
            field = self.ident("field name")
            self.expect_kw("OF")
            return PermutationOf(field, self.from_list(False), alias)
        raise self.error("unknown guessable FROM shape", tok)

    # -- expressions
    def expr(self):
        left = self.and_expr()
        while self.accept_kw("OR"):
            left = BoolOr(left, self.and_expr())
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.accept_kw("AND"):
            left = BoolAnd(left, self.not_expr())
        return left

    def not_expr(self):
        if self.tok.is_kw("NOT"):
            if self.peek().is_kw("EXISTS"):
                self.advance()
                return self.exists(negated=True)
            self.advance()
            return BoolNot(self.not_expr())
        return self.predicate()

    def exists(self, negated: bool):
        self.expect_kw("EXISTS")
        self.expect_op("(")
        q = self.query()
        self.expect_op(")")
        return Exists(q, negated)

    def predicate(self):
        if self.tok.is_kw("EXISTS"):
            return self.exists(negated=False)
        left = self.additive()
        if self.tok.kind == "OP" and self.tok.value in _COMPARE:
            op = self.advance().value
            return Compare(op, left, self.additive())
        negated = False
        if self.tok.is_kw("NOT") and self.peek().is_kw("IN"):
            self.advance()
            negated = True
        if self.accept_kw("IN"):
            self.expect_op("(")
            if self.tok.is_kw("SELECT"):
                q = self.query()
                self.expect_op(")")
                return InQuery(left, q, negated)
            options = [self.additive()]
            while self.accept_op(","):
                options.append(self.additive())
            self.expect_op(")")
            return InList(left, tuple(options), negated)
        if negated:
            raise self.error("expected IN")
        return left

    def additive(self):
        left = self.term()
        while self.tok.is_op("+", "-"):
            op = self.advance().value
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.tok.is_op("*", "/"):
            op = self.advance().value
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        if self.accept_op("-"):
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return Lit(t.value)
        if t.kind == "STRING":
            self.advance()
            return Lit(t.value)
        if t.is_kw("COUNT"):
            self.advance()
            self.expect_op("(")
            self.expect_op("*")
            self.expect_op(")")
            return Agg("COUNT")
        if t.is_kw("SUM"):
            self.advance()
            self.expect_op("(")
            arg = self.additive()
            self.expect_op(")")
            return Agg("SUM", arg)
        if t.kind == "IDENT":
            self.advance()
            if self.tok.is_op(".") and self.peek().kind == "IDENT":
                self.advance()
                return Col(t.value, self.advance().value)
            return Col(None, t.value)
        if t.is_op("("):
            self.advance()
            if self.tok.is_kw("SELECT"):
                q = self.query()
                self.expect_op(")")
                return ScalarQuery(q)
            e = self.expr()
            self.expect_op(")")
            return e
        raise self.error("expected an expression")


def _finish(p: Parser, node):
    if p.tok.kind != "EOF":
        raise p.error("unexpected trailing input")
    return node


def parse_script(text: str) -> Script:
    return Parser(text).script()


def parse_spec(text: str) -> Specification:
    """Parse text holding exactly one CREATE SPECIFICATION block."""
    script = parse_script(text)
    if len(script.specs) != 1:
        raise ParseError(f"expected one specification, found {len(script.specs)}")
    return script.specs[0]


def parse_query(text: str):
    p = Parser(text)
    return _finish(p, p.query())


def parse_condition(text: str):
    p = Parser(text)
    return _finish(p, p.expr())
