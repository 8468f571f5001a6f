"""Catalog, dictionary encoding, planning and statement execution."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import Optional, Union

from . import algebra, csql, poss
from .condition import (
    ENUMERATION_CAP,
    TRUE,
    Atom,
    Col,
    Condition,
    GlobalCondition,
    map_operands,
    render,
)
from .ctable import CTable, Schema
from .errors import (
    ArityMismatch,
    ExecutionError,
    Redeclaration,
    SchemaMismatch,
    UnknownColumn,
    UnknownLiteral,
    UnknownTable,
    UnknownVariable,
)


class Dictionary:
    """Bijection between string literals and positive integer codes."""

    def __init__(self):
        self._codes: dict[str, int] = {}
        self._strings: dict[int, str] = {}

    def encode(self, s: str) -> int:
        code = self._codes.get(s)
        if code is None:
            code = len(self._strings) + 1
            self._codes[s] = code
            self._strings[code] = s
        return code

    def lookup(self, s: str) -> int:
        try:
            return self._codes[s]
        except KeyError:
            raise UnknownLiteral(f"string {s!r} does not occur in the database") from None

    def get(self, s: str) -> Optional[int]:
        return self._codes.get(s)

    def decode(self, code: int) -> Optional[str]:
        return self._strings.get(code)

    def items(self) -> list[tuple[int, str]]:
        return sorted(self._strings.items())

    def __len__(self) -> int:
        return len(self._strings)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dictionary) and self._strings == other._strings


@dataclass
class Database:
    """Catalog of c-tables plus the global condition and string dictionary.

    SELECT and IS-* statements only read; CREATE, DECLARE and INSERT replace
    catalog entries and need exclusive access.
    """

    tables: dict[str, CTable] = field(default_factory=dict)
    global_: GlobalCondition = field(default_factory=GlobalCondition)
    dictionary: Dictionary = field(default_factory=Dictionary)

    def table(self, name: str) -> CTable:
        try:
            return self.tables[name.lower()]
        except KeyError:
            raise UnknownTable(f"no c-table named {name!r}") from None

    def add_table(self, table: CTable) -> None:
        key = table.schema.name.lower()
        if key in self.tables:
            raise ExecutionError(f"c-table {table.schema.name!r} already exists")
        for k in sorted(table.variables()):
            if k not in self.global_:
                raise UnknownVariable(f"x{k} is not declared")
        self.tables[key] = table

    def declare(self, k: int, codes: Sequence[int]) -> None:
        if k in self.global_:
            raise Redeclaration(f"x{k} already has a domain")
        self.global_.declare(k, codes)

    @property
    def next_variable(self) -> int:
        declared = self.global_.variables()
        return declared[-1] + 1 if declared else 1

    # display helpers

    def format_cell(self, term: int) -> str:
        if term < 0:
            return f"x{-term}"
        s = self.dictionary.decode(term)
        return str(term) if s is None else s

    def format_constant(self, term) -> str:
        if isinstance(term, int) and term > 0:
            s = self.dictionary.decode(term)
            if s is not None:
                return "'" + s.replace("'", "''") + "'"
        return self.format_cell(term) if isinstance(term, int) else repr(term)

    def format_condition(self, c: Condition, *, spaced: bool = False) -> str:
        return render(c, self.format_constant, spaced=spaced)


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class ResultTable:
    table: CTable
    stats: algebra.Stats = field(default_factory=algebra.Stats, compare=False)


@dataclass(frozen=True)
class BoolResult:
    value: bool


@dataclass(frozen=True)
class Ack:
    message: str
    rows: int = 0


ExecResult = Union[ResultTable, BoolResult, Ack]


# -- planning -------------------------------------------------------------------


@dataclass(frozen=True)
class Scan:
    table: str
    alias: Optional[str] = None


@dataclass(frozen=True)
class Prune:
    child: "Plan"


@dataclass(frozen=True)
class SelectNode:
    child: "Plan"
    predicate: Condition


@dataclass(frozen=True)
class JoinNode:
    left: "Plan"
    right: "Plan"
    on: Condition
    aliases: tuple[Optional[str], Optional[str]]


@dataclass(frozen=True)
class ProjectNode:
    child: "Plan"
    columns: tuple[int, ...]
    names: tuple[str, ...]


Plan = Union[Scan, Prune, SelectNode, JoinNode, ProjectNode]


def explain(node: Plan) -> str:
    if isinstance(node, Scan):
        return f"scan({node.table}{' ' + node.alias if node.alias else ''})"
    if isinstance(node, Prune):
        return f"prune({explain(node.child)})"
    if isinstance(node, SelectNode):
        return f"select({explain(node.child)})"
    if isinstance(node, JoinNode):
        return f"join({explain(node.left)}, {explain(node.right)})"
    return f"project({explain(node.child)}, {', '.join(node.names)})"


class _Scope:
    """Maps column references to positions in an intermediate result."""

    def __init__(self, entries: list[tuple[str, str]]):
        # (qualifier, column name as stored)
        self.entries = entries

    @classmethod
    def of(cls, table: CTable, item: csql.FromItem) -> _Scope:
        return cls([(item.scope_name, c) for c in table.schema.columns])

    def __add__(self, other: _Scope) -> _Scope:
        return _Scope(self.entries + other.entries)

    def resolve(self, ref: csql.ColRef) -> int:
        name = ref.name.lower()
        hits = []
        for i, (qual, col) in enumerate(self.entries):
            col_l = col.lower()
            if ref.qualifier is None:
                ok = col_l == name or col_l.rsplit(".", 1)[-1] == name
            else:
                q = ref.qualifier.lower()
                ok = (qual.lower() == q and col_l == name) or col_l == f"{q}.{name}"
            if ok:
                hits.append(i)
        text = csql.render_operand(ref)
        if not hits:
            raise UnknownColumn(f"unknown column {text}")
        if len(hits) > 1:
            raise UnknownColumn(f"ambiguous column {text}")
        return hits[0]


def _resolve_condition(c: Condition, scope: _Scope, db: Database) -> Condition:
    def operand(o):
        if isinstance(o, csql.ColRef):
            return Col(scope.resolve(o))
        if isinstance(o, csql.VarRef):
            if o.id not in db.global_:
                raise UnknownVariable(f"x{o.id} is not declared")
            return -o.id
        if isinstance(o, csql.IntLit):
            return o.value
        return db.dictionary.lookup(o.value)

    return map_operands(c, operand)


def plan(sel: csql.Select, db: Database) -> Plan:
    """Left-deep joins in source order, then WHERE, then projection."""
    base = db.table(sel.source.table)
    node: Plan = Prune(Scan(base.schema.name, sel.source.alias))
    scope = _Scope.of(base, sel.source)
    joined = False
    for clause in sel.joins:
        right = db.table(clause.item.table)
        rscope = _Scope.of(right, clause.item)
        left_alias = None if joined else sel.source.scope_name
        scope = scope + rscope
        on = TRUE if clause.on is None else _resolve_condition(clause.on, scope, db)
        node = JoinNode(
            node,
            Prune(Scan(right.schema.name, clause.item.alias)),
            on,
            (left_alias, clause.item.scope_name),
        )
        joined = True
    if joined:
        # joined columns now carry their qualifier in the name
        scope = _Scope(
            [(q, c if "." in c else f"{q}.{c}") for q, c in scope.entries]
        )
    if sel.where is not None:
        node = SelectNode(node, _resolve_condition(sel.where, scope, db))
    if sel.items is not None:
        cols = tuple(scope.resolve(item.column) for item in sel.items)
        names = tuple(
            item.alias or scope.entries[i][1] for item, i in zip(sel.items, cols)
        )
        node = ProjectNode(node, cols, names)
    return node


def run_plan(
    node: Plan,
    db: Database,
    *,
    cap: int = ENUMERATION_CAP,
    stats: algebra.Stats | None = None,
) -> CTable:
    g = db.global_
    if isinstance(node, Scan):
        return db.table(node.table)
    if isinstance(node, Prune):
        return algebra.prune(run_plan(node.child, db, cap=cap, stats=stats), g, cap=cap, stats=stats)
    if isinstance(node, SelectNode):
        child = run_plan(node.child, db, cap=cap, stats=stats)
        return algebra.select_(child, node.predicate, g, cap=cap, stats=stats)
    if isinstance(node, JoinNode):
        left = run_plan(node.left, db, cap=cap, stats=stats)
        right = run_plan(node.right, db, cap=cap, stats=stats)
        return algebra.join(
            left, right, node.on, g, aliases=node.aliases, name="result", cap=cap, stats=stats
        )
    child = run_plan(node.child, db, cap=cap, stats=stats)
    return algebra.project(child, node.columns, g, names=node.names, cap=cap, stats=stats)


# -- execution ------------------------------------------------------------------


class Engine:
    """Executes parsed C-SQL statements against a :class:`Database`."""

    def __init__(self, db: Database | None = None, *, cap: int = ENUMERATION_CAP):
        self.db = db if db is not None else Database()
        self.cap = cap

    def run(self, text: str) -> ExecResult:
        return self.execute(csql.parse(text))

    def run_script(self, text: str) -> Iterator[ExecResult]:
        for _, source in csql.split_script(text):
            yield self.run(source)

    def query(self, sel: csql.Select) -> ResultTable:
        stats = algebra.Stats()
        table = run_plan(plan(sel, self.db), self.db, cap=self.cap, stats=stats)
        return ResultTable(table, stats)

    def execute(self, stmt: csql.Statement) -> ExecResult:
        db = self.db
        if isinstance(stmt, csql.Select):
            return self.query(stmt)
        if isinstance(stmt, csql.CreateCTable):
            db.add_table(CTable(Schema(stmt.name, stmt.columns)))
            return Ack(f"created c-table {stmt.name}")
        if isinstance(stmt, csql.CreateCTableAs):
            result = self.query(stmt.query).table
            db.add_table(CTable(Schema(stmt.name, result.schema.columns), result.rows))
            return Ack(f"created c-table {stmt.name}", len(result))
        if isinstance(stmt, csql.DeclareVariable):
            if stmt.var in db.global_:
                raise Redeclaration(f"x{stmt.var} already has a domain")
            db.declare(stmt.var, [self._encode(v) for v in stmt.domain])
            return Ack(f"declared x{stmt.var}")
        if isinstance(stmt, csql.Insert):
            return self._insert(stmt)
        if isinstance(stmt, (csql.IsPossible, csql.IsCertain)):
            return BoolResult(self._membership(stmt))
        raise ExecutionError(f"cannot execute {type(stmt).__name__} statements")

    def _encode(self, lit) -> int:
        if isinstance(lit, csql.IntLit):
            return lit.value
        return self.db.dictionary.encode(lit.value)

    def _insert(self, stmt: csql.Insert) -> Ack:
        db = self.db
        table = db.table(stmt.table)
        if len(stmt.values) != table.schema.arity:
            raise ArityMismatch(
                f"{table.schema.name} has {table.schema.arity} columns, got {len(stmt.values)} values"
            )
        for v in stmt.values:
            if isinstance(v, csql.VarRef) and v.id not in db.global_:
                raise UnknownVariable(f"x{v.id} is not declared")
        local = TRUE
        if stmt.condition is not None:
            def operand(o):
                if isinstance(o, csql.ColRef):
                    raise UnknownColumn(
                        f"column {csql.render_operand(o)} cannot appear in a CONDITION clause"
                    )
                if isinstance(o, csql.VarRef):
                    if o.id not in db.global_:
                        raise UnknownVariable(f"x{o.id} is not declared")
                    return -o.id
                return self._encode(o)

            local = map_operands(stmt.condition, operand)
        terms = [-v.id if isinstance(v, csql.VarRef) else self._encode(v) for v in stmt.values]
        try:
            updated = algebra.insert_tuple(table, terms, db.global_, local)
        except SchemaMismatch as exc:
            raise ArityMismatch(str(exc)) from None
        db.tables[table.schema.name.lower()] = updated
        return Ack(f"inserted into {table.schema.name}", 1)

    def _membership(self, stmt) -> bool:
        db = self.db
        if isinstance(stmt.target, str):
            src = db.table(stmt.target)
        else:
            src = self.query(stmt.target).table
        tuples = []
        for pairs in stmt.tuples:
            encoded = []
            for name, lit in pairs:
                if isinstance(lit, csql.IntLit):
                    encoded.append((name, lit.value))
                    continue
                code = db.dictionary.get(lit.value)
                if code is None:
                    # a string never stored cannot occur in any world; still
                    # validate the column names before answering
                    poss.positional(src.schema, [(n, 1) for n, _ in pairs])
                    return False
                encoded.append((name, code))
            tuples.append(encoded)
        certain = isinstance(stmt, csql.IsCertain)
        g = db.global_
        if not stmt.is_set:
            test = poss.is_certain if certain else poss.is_possible
            return test(tuples[0], src, g, self.cap)
        test = poss.is_certain_set if certain else poss.is_possible_set
        return test(tuples, src, g, cap=self.cap)
