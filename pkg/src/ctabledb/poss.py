"""IS POSSIBLE / IS CERTAIN tests for single tuples and small tuple sets."""

from __future__ import annotations

from collections.abc import Sequence

from .condition import (
    ENUMERATION_CAP,
    FALSE,
    TRUE,
    Atom,
    Condition,
    GlobalCondition,
    conj,
    disj,
    sat_under,
    taut_under,
)
from .ctable import CTable, CTuple, Schema
from .errors import ColumnMismatch, SetTooLarge

SET_LIMIT = 4

GroundTuple = Sequence[tuple[str, int]]


def positional(schema: Schema, pairs: GroundTuple) -> tuple[int, ...]:
    """Order (column, value) pairs by the schema; they must cover it exactly."""
    by_name: dict[str, int] = {}
    for name, value in pairs:
        key = name.lower()
        if key in by_name:
            raise ColumnMismatch(f"column {name!r} given twice")
        by_name[key] = value
    wanted = [c.lower() for c in schema.columns]
    if set(by_name) != set(wanted):
        missing = sorted(set(wanted) - set(by_name))
        extra = sorted(set(by_name) - set(wanted))
        raise ColumnMismatch(
            f"tuple columns do not match {schema.name}: missing {missing}, unexpected {extra}"
        )
    return tuple(by_name[c] for c in wanted)


def match_condition(u: CTuple, values: Sequence[int]) -> Condition:
    """Condition under which row ``u`` becomes the ground tuple ``values``."""
    if len(values) != len(u.terms):
        raise ColumnMismatch(f"expected {len(u.terms)} values, got {len(values)}")
    parts: list[Condition] = []
    for term, value in zip(u.terms, values):
        if term > 0:
            if term != value:
                return FALSE
        else:
            parts.append(Atom(term, "=", value))
    return conj(u.local, *parts)


def _occurs(values: Sequence[int], src: CTable) -> Condition:
    return disj(*(match_condition(u, values) for u in src.rows))


def is_possible(
    t: GroundTuple, src: CTable, g: GlobalCondition, cap: int = ENUMERATION_CAP
) -> bool:
    values = positional(src.schema, t)
    return any(sat_under(match_condition(u, values), g, cap) for u in src.rows)


def is_certain(
    t: GroundTuple, src: CTable, g: GlobalCondition, cap: int = ENUMERATION_CAP
) -> bool:
    cond = _occurs(positional(src.schema, t), src)
    return cond is TRUE or (cond is not FALSE and taut_under(cond, g, cap))


def _all_occur(
    ts: Sequence[GroundTuple], src: CTable, limit: int
) -> Condition:
    if len(ts) > limit:
        raise SetTooLarge(f"tuple sets are limited to {limit} tuples, got {len(ts)}")
    return conj(*(_occurs(positional(src.schema, t), src) for t in ts))


def is_possible_set(
    ts: Sequence[GroundTuple],
    src: CTable,
    g: GlobalCondition,
    *,
    limit: int = SET_LIMIT,
    cap: int = ENUMERATION_CAP,
) -> bool:
    """Can a single possible world contain every tuple of ``ts``?"""
    return sat_under(_all_occur(ts, src, limit), g, cap)


def is_certain_set(
    ts: Sequence[GroundTuple],
    src: CTable,
    g: GlobalCondition,
    *,
    limit: int = SET_LIMIT,
    cap: int = ENUMERATION_CAP,
) -> bool:
    return taut_under(_all_occur(ts, src, limit), g, cap)
