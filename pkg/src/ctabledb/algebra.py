"""Relational algebra over c-tables.

Every operator returns the exact answer as a new c-table and prunes it on the
way out: rows whose condition contradicts the global condition are dropped
and conditions implied by it become TRUE.

Predicates are conditions whose operands may be :class:`~.condition.Col`
references.  A constant cell that fails a ground comparison removes the row
before any satisfiability work; a variable cell always passes that filter and
leaves the decision to the row condition.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .condition import (
    ENUMERATION_CAP,
    FALSE,
    OPS,
    TRUE,
    MIRROR,
    And,
    Atom,
    Col,
    Condition,
    GlobalCondition,
    conj,
    disj,
    map_operands,
    simplify,
    variables,
)
from .ctable import CTable, CTuple, Schema
from .errors import SchemaMismatch, UnknownVariable


@dataclass
class Stats:
    """Counters filled in by the operators when a caller passes one in."""

    candidates: int = 0
    pruned: int = 0


def specialize(p: Condition, terms: Sequence[int]) -> Condition:
    """Replace each column reference of ``p`` by the row's term."""
    return map_operands(p, lambda o: terms[o.index] if isinstance(o, Col) else o)


def _instantiate(p: Condition, terms: Sequence[int]) -> Condition:
    # specialize + ground folding in one pass; hot path of select_ and join
    if p is TRUE or p is FALSE:
        return p
    if isinstance(p, Atom):
        lhs, rhs = p.lhs, p.rhs
        if isinstance(lhs, Col):
            lhs = terms[lhs.index]
        if isinstance(rhs, Col):
            rhs = terms[rhs.index]
        if lhs > 0:
            if rhs > 0:
                return TRUE if OPS[p.op](lhs, rhs) else FALSE
            return Atom(rhs, MIRROR[p.op], lhs)
        return Atom(lhs, p.op, rhs)
    parts = [_instantiate(ch, terms) for ch in p.children]
    return conj(*parts) if isinstance(p, And) else disj(*parts)


def _check_columns(p: Condition, arity: int) -> None:
    def check(o):
        if isinstance(o, Col) and not 0 <= o.index < arity:
            raise SchemaMismatch(f"column #{o.index} out of range for arity {arity}")
        return o

    map_operands(p, check)


def _finish(cond: Condition, g: GlobalCondition, cap: int, stats: Stats | None):
    if stats is not None:
        stats.candidates += 1
    if cond is TRUE:
        return TRUE
    out = simplify(cond, g, cap)
    if out is FALSE and stats is not None:
        stats.pruned += 1
    return out


def select_(
    t: CTable,
    p: Condition,
    g: GlobalCondition,
    *,
    cap: int = ENUMERATION_CAP,
    stats: Stats | None = None,
) -> CTable:
    _check_columns(p, t.schema.arity)
    rows = []
    for terms, local in t.rows:
        cond = _instantiate(p, terms)
        if cond is FALSE:
            continue
        cond = _finish(conj(local, cond), g, cap, stats)
        if cond is not FALSE:
            rows.append(CTuple(terms, cond))
    return t.with_rows(rows)


def project(
    t: CTable,
    cols: Sequence[int | str],
    g: GlobalCondition,
    *,
    names: Sequence[str] | None = None,
    cap: int = ENUMERATION_CAP,
    stats: Stats | None = None,
) -> CTable:
    """Keep ``cols`` (indexes or names); rows that coincide OR their conditions."""
    if not cols:
        raise SchemaMismatch("projection needs at least one column")
    idx = [t.schema.index(c) if isinstance(c, str) else c for c in cols]
    for i in idx:
        if not 0 <= i < t.schema.arity:
            raise SchemaMismatch(f"column #{i} out of range for {t.schema.name}")
    columns = tuple(names) if names is not None else tuple(t.schema.columns[i] for i in idx)
    schema = Schema(t.schema.name, columns)

    merged: dict[tuple[int, ...], list[Condition]] = {}
    for terms, local in t.rows:
        merged.setdefault(tuple(terms[i] for i in idx), []).append(local)
    rows = []
    for terms, conds in merged.items():
        cond = _finish(disj(*conds), g, cap, stats)
        if cond is not FALSE:
            rows.append(CTuple(terms, cond))
    return CTable(schema, tuple(rows))


def _qualify(columns: Sequence[str], alias: str | None) -> list[str]:
    if alias is None:
        return list(columns)
    return [c if "." in c else f"{alias}.{c}" for c in columns]


def join(
    left: CTable,
    right: CTable,
    on: Condition,
    g: GlobalCondition,
    *,
    aliases: tuple[str | None, str | None] = (None, None),
    name: str | None = None,
    cap: int = ENUMERATION_CAP,
    stats: Stats | None = None,
) -> CTable:
    """Theta-join; ``on`` indexes the concatenated row (left columns first).

    Output columns are prefixed ``alias.`` unless already qualified.
    """
    columns = _qualify(left.schema.columns, aliases[0]) + _qualify(
        right.schema.columns, aliases[1]
    )
    schema = Schema(name or f"{left.schema.name}_{right.schema.name}", tuple(columns))
    _check_columns(on, schema.arity)
    rows = []
    for lterms, llocal in left.rows:
        for rterms, rlocal in right.rows:
            terms = lterms + rterms
            cond = _instantiate(on, terms)
            if cond is FALSE:
                continue
            cond = _finish(conj(llocal, rlocal, cond), g, cap, stats)
            if cond is not FALSE:
                rows.append(CTuple(terms, cond))
    return CTable(schema, tuple(rows))


def cross(left: CTable, right: CTable, g: GlobalCondition, **kw) -> CTable:
    return join(left, right, TRUE, g, **kw)


def insert_tuple(
    t: CTable,
    terms: Sequence[int],
    g: GlobalCondition,
    local: Condition = TRUE,
) -> CTable:
    terms = tuple(terms)
    if len(terms) != t.schema.arity:
        raise SchemaMismatch(
            f"{t.schema.name} expects {t.schema.arity} values, got {len(terms)}"
        )
    for k in sorted({-x for x in terms if x < 0} | variables(local)):
        if k not in g:
            raise UnknownVariable(f"x{k} is not declared")
    return t.with_rows(t.rows + (CTuple(terms, local),))


def prune(
    t: CTable,
    g: GlobalCondition,
    *,
    cap: int = ENUMERATION_CAP,
    stats: Stats | None = None,
) -> CTable:
    rows = []
    for terms, local in t.rows:
        cond = _finish(local, g, cap, stats)
        if cond is not FALSE:
            rows.append(CTuple(terms, cond))
    return t.with_rows(rows)

