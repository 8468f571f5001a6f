"""C-table data model and the brute-force possible-worlds oracle."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from typing import NamedTuple

from .condition import (
    ENUMERATION_CAP,
    TRUE,
    Condition,
    GlobalCondition,
    Valuation,
    eval_ground,
    variables,
)
from .errors import EnumerationCap, SchemaMismatch, UnboundVariable


@dataclass(frozen=True)
class Schema:
    name: str
    columns: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.columns:
            raise SchemaMismatch(f"table {self.name} needs at least one column")
        seen = set()
        for col in self.columns:
            key = col.lower()
            if key in seen:
                raise SchemaMismatch(f"duplicate column {col!r} in {self.name}")
            seen.add(key)

    @property
    def arity(self) -> int:
        return len(self.columns)

    def index(self, column: str) -> int:
        key = column.lower()
        for i, col in enumerate(self.columns):
            if col.lower() == key:
                return i
        raise SchemaMismatch(f"{self.name} has no column {column!r}")


class CTuple(NamedTuple):
    terms: tuple[int, ...]
    local: Condition = TRUE


@dataclass(frozen=True)
class CTable:
    schema: Schema
    rows: tuple[CTuple, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        arity = self.schema.arity
        for row in self.rows:
            if len(row.terms) != arity:
                raise SchemaMismatch(
                    f"row {row.terms} has {len(row.terms)} terms, {self.schema.name} expects {arity}"
                )

    def __len__(self) -> int:
        return len(self.rows)

    def variables(self) -> frozenset[int]:
        found = set()
        for terms, local in self.rows:
            found.update(-t for t in terms if t < 0)
            found.update(variables(local))
        return frozenset(found)

    def with_rows(self, rows: Iterable[CTuple]) -> CTable:
        return CTable(self.schema, tuple(rows))


@dataclass(frozen=True)
class Relation:
    """A complete (variable-free) relation with set semantics."""

    columns: tuple[str, ...]
    rows: frozenset[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.rows)

    def sorted_rows(self) -> list[tuple[int, ...]]:
        return sorted(self.rows)


def apply_valuation(t: CTable, v: Valuation) -> Relation:
    out = set()
    for terms, local in t.rows:
        if not eval_ground(local, v):
            continue
        ground = []
        for term in terms:
            if term < 0:
                if -term not in v:
                    raise UnboundVariable(f"x{-term} is not bound by the valuation")
                term = v[-term]
            ground.append(term)
        out.add(tuple(ground))
    return Relation(t.schema.columns, frozenset(out))


def enumerate_valuations(
    g: GlobalCondition, vars_: Iterable[int], cap: int = ENUMERATION_CAP
) -> Iterator[dict[int, int]]:
    """All valuations of ``vars_`` drawn from ``g``, in lexicographic order."""
    order = sorted(set(vars_))
    domains = [g.domain(k) for k in order]
    size = math.prod(len(d) for d in domains)
    if size > cap:
        raise EnumerationCap(f"{size} valuations exceed the oracle cap {cap}")
    return (dict(zip(order, values)) for values in itertools.product(*domains))


def possible_worlds(
    t: CTable, g: GlobalCondition, cap: int = ENUMERATION_CAP
) -> set[Relation]:
    return {apply_valuation(t, v) for v in enumerate_valuations(g, t.variables(), cap)}


def certain_answer(t: CTable, g: GlobalCondition, cap: int = ENUMERATION_CAP) -> Relation:
    rows = None
    for world in possible_worlds(t, g, cap):
        rows = set(world.rows) if rows is None else rows & world.rows
    return Relation(t.schema.columns, frozenset(rows or ()))


def possible_answer(t: CTable, g: GlobalCondition, cap: int = ENUMERATION_CAP) -> Relation:
    rows: set[tuple[int, ...]] = set()
    for world in possible_worlds(t, g, cap):
        rows |= world.rows
    return Relation(t.schema.columns, frozenset(rows))

