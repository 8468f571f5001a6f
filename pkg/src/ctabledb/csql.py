"""Lexer, recursive-descent parser and renderer for C-SQL.

Statements::

    CREATE CTABLE Emp (Name, Gender, Mstat, Dept);
    CREATE CTABLE ItDept AS SELECT * FROM Emp WHERE Dept = 'IT';
    DECLARE VARIABLE x4 DOMAIN ('IT', 'PR');
    INSERT INTO Emp VALUES ('David', 'M', 'married', x4) CONDITION (x4 = 'IT' OR x4 = 'PR');
    SELECT e1.Name AS Name1, e2.Name AS Name2
        FROM Emp e1 INNER JOIN Emp e2 ON e1.Dept = e2.Dept
        WHERE e1.Gender = 'M' AND e2.Gender = 'F';
    IS POSSIBLE (Name, 'Bob', Dept, 'HR') IN SELECT Name, Dept FROM Emp;
    IS CERTAIN ((Name, 'Bob'), (Name, 'Ella')) IN Emp;

``FROM a, b`` is accepted as a cross product.  Lines starting with a
backslash are meta commands for the console.
"""

from __future__ import annotations

import re
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Optional, Union

from .condition import FALSE, TRUE, And, Atom, Condition, Or, Truth, conj, disj
from .errors import LexError, ParseError

KEYWORDS = frozenset(
    """SELECT FROM WHERE AND OR AS INNER JOIN ON CREATE CTABLE DECLARE VARIABLE
    DOMAIN INSERT INTO VALUES CONDITION IS POSSIBLE CERTAIN IN TRUE FALSE""".split()
)
COMPARISONS = ("<=", ">=", "!=", "<>", "=", "<", ">")
VAR_RE = re.compile(r"[xX][0-9]+\Z")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<symbol><=|>=|!=|<>|[=<>(),;*.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword, ident, var, int, string, symbol, eof
    lexeme: str
    offset: int

    @property
    def upper(self) -> str:
        return self.lexeme.upper()


def tokenize(text: str, *, keep_whitespace: bool = False) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == "'":
                raise LexError("unterminated string literal", pos)
            raise LexError(f"illegal character {text[pos]!r}", pos)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "word":
            if lexeme.upper() in KEYWORDS:
                kind = "keyword"
            elif VAR_RE.match(lexeme):
                kind = "var"
            else:
                kind = "ident"
        if kind != "ws" or keep_whitespace:
            tokens.append(Token(kind, lexeme, pos))
        pos = m.end()
    return tokens


# -- AST --------------------------------------------------------------------


@dataclass(frozen=True)
class ColRef:
    qualifier: Optional[str]
    name: str


@dataclass(frozen=True)
class VarRef:
    id: int


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class StrLit:
    value: str


Literal = Union[IntLit, StrLit]
Operand = Union[ColRef, VarRef, IntLit, StrLit]


@dataclass(frozen=True)
class SelectItem:
    column: ColRef
    alias: Optional[str] = None


@dataclass(frozen=True)
class FromItem:
    table: str
    alias: Optional[str] = None

    @property
    def scope_name(self) -> str:
        return self.alias or self.table


@dataclass(frozen=True)
class JoinClause:
    item: FromItem
    on: Optional[Condition] = None  # None: comma-separated cross product


@dataclass(frozen=True)
class Select:
    items: Optional[tuple[SelectItem, ...]]  # None means *
    source: FromItem
    joins: tuple[JoinClause, ...] = ()
    where: Optional[Condition] = None


@dataclass(frozen=True)
class CreateCTable:
    name: str
    columns: tuple[str, ...]


@dataclass(frozen=True)
class CreateCTableAs:
    name: str
    query: Select


@dataclass(frozen=True)
class DeclareVariable:
    var: int
    domain: tuple[Literal, ...]


@dataclass(frozen=True)
class Insert:
    table: str
    values: tuple[Union[IntLit, StrLit, VarRef], ...]
    condition: Optional[Condition] = None


Pairs = tuple[tuple[str, Literal], ...]


@dataclass(frozen=True)
class IsPossible:
    tuples: tuple[Pairs, ...]
    target: Union[str, Select]
    is_set: bool = False


@dataclass(frozen=True)
class IsCertain:
    tuples: tuple[Pairs, ...]
    target: Union[str, Select]
    is_set: bool = False


@dataclass(frozen=True)
class Meta:
    command: str
    args: tuple[str, ...] = ()


Statement = Union[
    CreateCTable, CreateCTableAs, DeclareVariable, Insert, Select, IsPossible, IsCertain, Meta
]


# -- parser -----------------------------------------------------------------


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # token helpers

    def peek(self, ahead: int = 0) -> Token:
        i = self.pos + ahead
        if i < len(self.tokens):
            return self.tokens[i]
        return Token("eof", "", len(self.text))

    def fail(self, *expected: str):
        tok = self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.lexeme)
        raise ParseError(f"expected {' or '.join(expected)}, found {found}", tok.offset, expected)

    def at_keyword(self, *words: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == "keyword" and tok.upper in words

    def at_symbol(self, *symbols: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == "symbol" and tok.lexeme in symbols

    def keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.fail(word)
        return self.advance()

    def symbol(self, sym: str) -> Token:
        if not self.at_symbol(sym):
            self.fail(repr(sym))
        return self.advance()

    def advance(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def ident(self) -> str:
        if self.peek().kind != "ident":
            self.fail("identifier")
        return self.advance().lexeme

    # statements

    def statement(self) -> Statement:
        if self.at_keyword("CREATE"):
            stmt = self.create()
        elif self.at_keyword("DECLARE"):
            stmt = self.declare()
        elif self.at_keyword("INSERT"):
            stmt = self.insert()
        elif self.at_keyword("SELECT"):
            stmt = self.select()
        elif self.at_keyword("IS"):
            stmt = self.membership()
        else:
            self.fail("CREATE", "DECLARE", "INSERT", "SELECT", "IS")
        if self.at_symbol(";"):
            self.advance()
        if self.peek().kind != "eof":
            self.fail("end of statement")
        return stmt

    def create(self) -> Statement:
        self.keyword("CREATE")
        self.keyword("CTABLE")
        name = self.ident()
        if self.at_keyword("AS"):
            self.advance()
            return CreateCTableAs(name, self.select())
        self.symbol("(")
        columns = [self.ident()]
        while self.at_symbol(","):
            self.advance()
            columns.append(self.ident())
        self.symbol(")")
        return CreateCTable(name, tuple(columns))

    def declare(self) -> DeclareVariable:
        self.keyword("DECLARE")
        self.keyword("VARIABLE")
        v = self.var()
        self.keyword("DOMAIN")
        self.symbol("(")
        values = [self.literal()]
        while self.at_symbol(","):
            self.advance()
            values.append(self.literal())
        self.symbol(")")
        return DeclareVariable(v.id, tuple(values))

    def insert(self) -> Insert:
        self.keyword("INSERT")
        self.keyword("INTO")
        table = self.ident()
        self.keyword("VALUES")
        self.symbol("(")
        values = [self.value()]
        while self.at_symbol(","):
            self.advance()
            values.append(self.value())
        self.symbol(")")
        cond = None
        if self.at_keyword("CONDITION"):
            self.advance()
            cond = self.condition()
        return Insert(table, tuple(values), cond)

    def select(self) -> Select:
        self.keyword("SELECT")
        items = None
        if self.at_symbol("*"):
            self.advance()
        else:
            items = [self.select_item()]
            while self.at_symbol(","):
                self.advance()
                items.append(self.select_item())
            items = tuple(items)
        self.keyword("FROM")
        source = self.from_item()
        joins = []
        while True:
            if self.at_symbol(","):
                self.advance()
                joins.append(JoinClause(self.from_item()))
            elif self.at_keyword("INNER"):
                self.advance()
                self.keyword("JOIN")
                item = self.from_item()
                self.keyword("ON")
                joins.append(JoinClause(item, self.condition()))
            else:
                break
        where = None
        if self.at_keyword("WHERE"):
            self.advance()
            where = self.condition()
        return Select(items, source, tuple(joins), where)

    def select_item(self) -> SelectItem:
        col = self.colref()
        alias = None
        if self.at_keyword("AS"):
            self.advance()
            alias = self.ident()
        return SelectItem(col, alias)

    def from_item(self) -> FromItem:
        table = self.ident()
        alias = self.ident() if self.peek().kind == "ident" else None
        return FromItem(table, alias)

    def membership(self) -> Statement:
        self.keyword("IS")
        if self.at_keyword("POSSIBLE"):
            cls = IsPossible
        elif self.at_keyword("CERTAIN"):
            cls = IsCertain
        else:
            self.fail("POSSIBLE", "CERTAIN")
        self.advance()
        self.symbol("(")
        if self.at_symbol("("):
            tuples = [self.pairs()]
            while self.at_symbol(","):
                self.advance()
                tuples.append(self.pairs())
            self.symbol(")")
            is_set = True
        else:
            tuples = [self.pairs(opened=True)]
            is_set = False
        self.keyword("IN")
        target = self.select() if self.at_keyword("SELECT") else self.ident()
        return cls(tuple(tuples), target, is_set)

    def pairs(self, opened: bool = False) -> Pairs:
        if not opened:
            self.symbol("(")
        out = []
        while True:
            name = self.ident()
            self.symbol(",")
            out.append((name, self.literal()))
            if not self.at_symbol(","):
                break
            self.advance()
        self.symbol(")")
        return tuple(out)

    # conditions

    def condition(self) -> Condition:
        parts = [self.conjunction()]
        while self.at_keyword("OR"):
            self.advance()
            parts.append(self.conjunction())
        return disj(*parts) if len(parts) > 1 else parts[0]

    def conjunction(self) -> Condition:
        parts = [self.primary()]
        while self.at_keyword("AND"):
            self.advance()
            parts.append(self.primary())
        return conj(*parts) if len(parts) > 1 else parts[0]

    def primary(self) -> Condition:
        if self.at_symbol("("):
            self.advance()
            cond = self.condition()
            self.symbol(")")
            return cond
        if self.at_keyword("TRUE"):
            self.advance()
            return TRUE
        if self.at_keyword("FALSE"):
            self.advance()
            return FALSE
        lhs = self.operand()
        if not self.at_symbol(*COMPARISONS):
            self.fail("comparison operator")
        op = self.advance().lexeme
        return Atom(lhs, "!=" if op == "<>" else op, self.operand())

    def operand(self) -> Operand:
        tok = self.peek()
        if tok.kind == "ident":
            return self.colref()
        if tok.kind == "var":
            return self.var()
        if tok.kind in ("int", "string"):
            return self.literal()
        self.fail("column", "variable", "literal")

    def colref(self) -> ColRef:
        first = self.ident()
        if self.at_symbol(".") and self.peek(1).kind == "ident":
            self.advance()
            return ColRef(first, self.ident())
        return ColRef(None, first)

    def var(self) -> VarRef:
        tok = self.peek()
        if tok.kind != "var":
            self.fail("variable")
        self.advance()
        k = int(tok.lexeme[1:])
        if k < 1:
            raise ParseError("variable ids start at 1", tok.offset, ("variable",))
        return VarRef(k)

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            value = int(tok.lexeme)
            if value < 1:
                raise ParseError("constants are positive integers", tok.offset, ("literal",))
            return IntLit(value)
        if tok.kind == "string":
            self.advance()
            return StrLit(tok.lexeme[1:-1].replace("''", "'"))
        self.fail("literal")

    def value(self):
        if self.peek().kind == "var":
            return self.var()
        return self.literal()


def parse(text: str) -> Statement:
    stripped = text.strip()
    if stripped.startswith("\\"):
        words = stripped[1:].split()
        if not words:
            raise ParseError("expected meta command after backslash", text.index("\\") + 1)
        return Meta(words[0].lower(), tuple(words[1:]))
    return Parser(text).statement()


def parse_condition(text: str) -> Condition:
    p = Parser(text)
    cond = p.condition()
    if p.peek().kind != "eof":
        p.fail("end of condition")
    return cond


def split_script(text: str) -> Iterator[tuple[int, str]]:
    """Yield ``(offset, source)`` for each statement or meta command of a script.

    Statements end at ``;`` outside string literals; a meta command is a line
    whose first non-blank character is a backslash.
    """
    i, n = 0, len(text)
    start = None
    while i < n:
        ch = text[i]
        if start is None:
            if ch.isspace():
                i += 1
                continue
            if text.startswith("--", i):
                i = _line_end(text, i)
                continue
            if ch == "\\":
                end = _line_end(text, i)
                yield i, text[i:end].rstrip()
                i = end
                continue
            start = i
        if ch == "'":
            close = text.find("'", i + 1)
            while close != -1 and text.startswith("''", close):
                close = text.find("'", close + 2)
            i = n if close == -1 else close + 1
            continue
        if text.startswith("--", i):
            i = _line_end(text, i)
            continue
        if ch == ";":
            yield start, text[start : i + 1]
            start = None
        i += 1
    if start is not None and text[start:].strip():
        yield start, text[start:].rstrip()


def _line_end(text: str, i: int) -> int:
    end = text.find("\n", i)
    return len(text) if end == -1 else end


# -- renderer ---------------------------------------------------------------


def render_literal(lit: Literal) -> str:
    if isinstance(lit, IntLit):
        return str(lit.value)
    return "'" + lit.value.replace("'", "''") + "'"


def render_operand(o: Operand) -> str:
    if isinstance(o, ColRef):
        return f"{o.qualifier}.{o.name}" if o.qualifier else o.name
    if isinstance(o, VarRef):
        return f"x{o.id}"
    return render_literal(o)


def render_condition(c: Condition) -> str:
    if isinstance(c, Truth):
        return "TRUE" if c is TRUE else "FALSE"
    if isinstance(c, Atom):
        return f"{render_operand(c.lhs)} {c.op} {render_operand(c.rhs)}"
    if isinstance(c, And):
        return " AND ".join(
            f"({render_condition(ch)})" if isinstance(ch, Or) else render_condition(ch)
            for ch in c.children
        )
    return " OR ".join(render_condition(ch) for ch in c.children)


def _render_from(item: FromItem) -> str:
    return f"{item.table} {item.alias}" if item.alias else item.table


def _render_select(s: Select) -> str:
    if s.items is None:
        cols = "*"
    else:
        cols = ", ".join(
            render_operand(i.column) + (f" AS {i.alias}" if i.alias else "") for i in s.items
        )
    out = f"SELECT {cols} FROM {_render_from(s.source)}"
    for j in s.joins:
        if j.on is None:
            out += f", {_render_from(j.item)}"
        else:
            out += f" INNER JOIN {_render_from(j.item)} ON {render_condition(j.on)}"
    if s.where is not None:
        out += f" WHERE {render_condition(s.where)}"
    return out


def _render_pairs(pairs: Pairs) -> str:
    return "(" + ", ".join(f"{name}, {render_literal(v)}" for name, v in pairs) + ")"


def render(stmt: Statement) -> str:
    """Canonical source text for a statement (terminated by ``;``)."""
    if isinstance(stmt, Meta):
        return " ".join(("\\" + stmt.command, *stmt.args))
    if isinstance(stmt, CreateCTable):
        body = f"CREATE CTABLE {stmt.name} ({', '.join(stmt.columns)})"
    elif isinstance(stmt, CreateCTableAs):
        body = f"CREATE CTABLE {stmt.name} AS {_render_select(stmt.query)}"
    elif isinstance(stmt, DeclareVariable):
        dom = ", ".join(render_literal(v) for v in stmt.domain)
        body = f"DECLARE VARIABLE x{stmt.var} DOMAIN ({dom})"
    elif isinstance(stmt, Insert):
        vals = ", ".join(render_operand(v) for v in stmt.values)
        body = f"INSERT INTO {stmt.table} VALUES ({vals})"
        if stmt.condition is not None:
            body += f" CONDITION {render_condition(stmt.condition)}"
    elif isinstance(stmt, Select):
        body = _render_select(stmt)
    elif isinstance(stmt, (IsPossible, IsCertain)):
        kind = "POSSIBLE" if isinstance(stmt, IsPossible) else "CERTAIN"
        if stmt.is_set:
            tuples = "(" + ", ".join(_render_pairs(t) for t in stmt.tuples) + ")"
        else:
            tuples = _render_pairs(stmt.tuples[0])
        target = stmt.target if isinstance(stmt.target, str) else _render_select(stmt.target)
        body = f"IS {kind} {tuples} IN {target}"
    else:
        raise TypeError(f"not a statement: {stmt!r}")
    return body + ";"
