"""Boolean conditions over comparison atoms.

Terms are plain integers using the storage encoding: a positive integer is a
constant and ``-k`` is the variable ``xk``.  Predicates used by the algebra
also allow :class:`Col` operands, which are replaced by row terms before any
evaluation happens.

Conditions are immutable trees of :data:`TRUE`, :data:`FALSE`, :class:`Atom`,
:class:`And` and :class:`Or`.  There is no negation node; :func:`negate`
pushes negation into the atoms by complementing their operators.
"""

from __future__ import annotations

import math
import operator
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Callable, Union

from .errors import DnfBlowup, EnumerationCap, UnboundVariable, UnknownVariable

DNF_CAP = 4096
ENUMERATION_CAP = 10**6

OPS: dict[str, Callable[[int, int], bool]] = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
COMPLEMENT = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
# operator to use when the two sides of an atom are swapped
MIRROR = {"=": "=", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}


def var(k: int) -> int:
    """Encode variable ``xk`` as a term."""
    if k < 1:
        raise ValueError(f"variable ids start at 1, got {k}")
    return -k


def const(c: int) -> int:
    if c < 1:
        raise ValueError(f"constants are positive integers, got {c}")
    return c


def is_var(term) -> bool:
    return type(term) is int and term < 0


def var_id(term: int) -> int:
    return -term


@dataclass(frozen=True, slots=True)
class Col:
    """Column reference inside a predicate, by position in the input row."""

    index: int


Operand = Union[int, Col]
Valuation = Mapping[int, int]


class Truth:
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __repr__(self) -> str:
        return "TRUE" if self.value else "FALSE"

    def __bool__(self) -> bool:
        raise TypeError("use `is TRUE` / `is FALSE` to test condition constants")

    def __reduce__(self):
        return (_truth, (self.value,))


def _truth(value: bool) -> Truth:
    return TRUE if value else FALSE


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True, slots=True)
class Atom:
    lhs: Operand
    op: str
    rhs: Operand

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")


@dataclass(frozen=True, slots=True)
class And:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("AND needs at least two children")


@dataclass(frozen=True, slots=True)
class Or:
    children: tuple

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("OR needs at least two children")


Condition = Union[Truth, Atom, And, Or]


def complement(a: Atom) -> Atom:
    return Atom(a.lhs, COMPLEMENT[a.op], a.rhs)


def negate(c: Condition) -> Condition:
    if c is TRUE:
        return FALSE
    if c is FALSE:
        return TRUE
    if isinstance(c, Atom):
        return complement(c)
    if isinstance(c, And):
        return Or(tuple(negate(ch) for ch in c.children))
    return And(tuple(negate(ch) for ch in c.children))


def conj(*parts: Condition) -> Condition:
    """AND the parts together, flattening nested ANDs and absorbing constants."""
    out: list[Condition] = []
    for p in parts:
        if p is TRUE:
            continue
        if p is FALSE:
            return FALSE
        if isinstance(p, And):
            out.extend(p.children)
        else:
            out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*parts: Condition) -> Condition:
    """OR the parts together, flattening nested ORs and absorbing constants."""
    out: list[Condition] = []
    for p in parts:
        if p is FALSE:
            continue
        if p is TRUE:
            return TRUE
        if isinstance(p, Or):
            out.extend(p.children)
        else:
            out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def atoms(c: Condition) -> Iterator[Atom]:
    if isinstance(c, Atom):
        yield c
    elif isinstance(c, (And, Or)):
        for ch in c.children:
            yield from atoms(ch)


def variables(c: Condition) -> frozenset[int]:
    """Ids of all variables occurring in ``c``."""
    found = set()
    for a in atoms(c):
        if is_var(a.lhs):
            found.add(-a.lhs)
        if is_var(a.rhs):
            found.add(-a.rhs)
    return frozenset(found)


def map_operands(c: Condition, fn: Callable[[Operand], Operand]) -> Condition:
    """Rebuild ``c`` with every atom operand passed through ``fn``.  No folding."""
    if isinstance(c, Atom):
        return Atom(fn(c.lhs), c.op, fn(c.rhs))
    if isinstance(c, And):
        return And(tuple(map_operands(ch, fn) for ch in c.children))
    if isinstance(c, Or):
        return Or(tuple(map_operands(ch, fn) for ch in c.children))
    return c


def bind(c: Condition, partial: Valuation) -> Condition:
    """Substitute the bound variables of ``c`` by their constants."""

    def sub(t):
        if is_var(t) and -t in partial:
            return partial[-t]
        return t

    return map_operands(c, sub)


# -- ground evaluation ------------------------------------------------------


def _value(t: Operand, v: Valuation) -> int:
    if type(t) is not int:
        raise TypeError(f"cannot evaluate unresolved operand {t!r}")
    if t > 0:
        return t
    try:
        return v[-t]
    except KeyError:
        raise UnboundVariable(f"x{-t} is not bound by the valuation") from None


def eval_atom(a: Atom, v: Valuation) -> bool:
    return OPS[a.op](_value(a.lhs, v), _value(a.rhs, v))


def eval_ground(c, v: Valuation) -> bool:
    """Evaluate a condition (or :class:`Dnf`) under a total valuation."""
    if isinstance(c, Dnf):
        missing = {k for d in c.disjuncts for a in d for k in variables(a)} - v.keys()
    else:
        missing = variables(c) - v.keys()
    if missing:
        raise UnboundVariable(f"x{min(missing)} is not bound by the valuation")
    if isinstance(c, Dnf):
        return c.evaluate(v)
    return _eval(c, v)


def _eval(c: Condition, v: Valuation) -> bool:
    if c is TRUE:
        return True
    if c is FALSE:
        return False
    if isinstance(c, Atom):
        return eval_atom(c, v)
    if isinstance(c, And):
        return all(_eval(ch, v) for ch in c.children)
    if isinstance(c, Or):
        return any(_eval(ch, v) for ch in c.children)
    raise TypeError(f"not a condition: {c!r}")


def _partial(c: Condition, v: Valuation):
    """Three-valued evaluation: True, False, or None when unbound vars matter."""
    if c is TRUE:
        return True
    if c is FALSE:
        return False
    if isinstance(c, Atom):
        lhs, rhs = c.lhs, c.rhs
        if lhs < 0:
            lhs = v.get(-lhs)
            if lhs is None:
                return None
        if rhs < 0:
            rhs = v.get(-rhs)
            if rhs is None:
                return None
        return OPS[c.op](lhs, rhs)
    if isinstance(c, And):
        result = True
        for ch in c.children:
            r = _partial(ch, v)
            if r is False:
                return False
            if r is None:
                result = None
        return result
    result = False
    for ch in c.children:
        r = _partial(ch, v)
        if r is True:
            return True
        if r is None:
            result = None
    return result


# -- DNF --------------------------------------------------------------------


@dataclass(frozen=True)
class Dnf:
    """Disjunction of conjunctions of atoms.

    No disjuncts means FALSE; a disjunct with no atoms is TRUE.
    """

    disjuncts: tuple[tuple[Atom, ...], ...]

    def evaluate(self, v: Valuation) -> bool:
        return any(all(eval_atom(a, v) for a in d) for d in self.disjuncts)

    def as_condition(self) -> Condition:
        return disj(*(conj(*d) for d in self.disjuncts))


def to_dnf(c: Condition, cap: int = DNF_CAP) -> Dnf:
    return Dnf(tuple(tuple(d) for d in _dnf(c, cap)))


def _dnf(c: Condition, cap: int) -> list[list[Atom]]:
    if c is TRUE:
        return [[]]
    if c is FALSE:
        return []
    if isinstance(c, Atom):
        return [[c]]
    if isinstance(c, Or):
        out: list[list[Atom]] = []
        for ch in c.children:
            out.extend(_dnf(ch, cap))
            if len(out) > cap:
                raise DnfBlowup(f"DNF exceeds {cap} disjuncts")
        return out
    acc: list[list[Atom]] = [[]]
    for ch in c.children:
        part = _dnf(ch, cap)
        if len(acc) * len(part) > cap:
            raise DnfBlowup(f"DNF exceeds {cap} disjuncts")
        acc = [left + right for left in acc for right in part]
    return acc


# -- global condition -------------------------------------------------------


class GlobalCondition:
    """Per-variable finite domains; the CNF of one clause per variable.

    Each clause ``(x = c1 OR x = c2 ...)`` is kept as a sorted tuple keyed by
    the variable id.
    """

    def __init__(self, domains: Mapping[int, Iterable[int]] | None = None):
        self._domains: dict[int, tuple[int, ...]] = {}
        for k, values in (domains or {}).items():
            self.declare(k, values)

    def declare(self, k: int, values: Iterable[int]) -> None:
        dom = tuple(sorted(set(values)))
        if not dom:
            raise ValueError(f"x{k} needs a non-empty domain")
        if any(c < 1 for c in dom):
            raise ValueError(f"domain of x{k} must hold positive constants")
        self._domains[k] = dom

    def domain(self, k: int) -> tuple[int, ...]:
        try:
            return self._domains[k]
        except KeyError:
            raise UnknownVariable(f"x{k} has no declared domain") from None

    def __contains__(self, k: int) -> bool:
        return k in self._domains

    def __len__(self) -> int:
        return len(self._domains)

    def __eq__(self, other) -> bool:
        return isinstance(other, GlobalCondition) and self._domains == other._domains

    def __repr__(self) -> str:
        return f"GlobalCondition({self._domains!r})"

    def variables(self) -> list[int]:
        return sorted(self._domains)

    def items(self) -> list[tuple[int, tuple[int, ...]]]:
        return sorted(self._domains.items())

    def copy(self) -> GlobalCondition:
        g = GlobalCondition()
        g._domains = dict(self._domains)
        return g

    def admits(self, v: Valuation) -> bool:
        return all(c in self.domain(k) for k, c in v.items())


def _space(vs: Iterable[int], g: GlobalCondition, cap: int) -> int:
    size = math.prod(len(g.domain(k)) for k in vs)
    if size > cap:
        raise EnumerationCap(f"{size} valuations to enumerate exceeds cap {cap}")
    return size


# -- satisfiability and tautology ---------------------------------------------


def _conjunct_sat(atoms_: tuple[Atom, ...], g: GlobalCondition, cap: int) -> bool:
    vs = set()
    for a in atoms_:
        if a.lhs < 0:
            vs.add(-a.lhs)
        if a.rhs < 0:
            vs.add(-a.rhs)
    order = sorted(vs)
    _space(order, g, cap)

    # ground atoms are decided up front; single-variable atoms shrink domains
    pos = {k: i for i, k in enumerate(order)}
    domains = {k: list(g.domain(k)) for k in order}
    pending: list[list[Atom]] = [[] for _ in order]
    for a in atoms_:
        mentioned = {-t for t in (a.lhs, a.rhs) if t < 0}
        if not mentioned:
            if not eval_atom(a, {}):
                return False
        elif len(mentioned) == 1:
            (k,) = mentioned
            domains[k] = [c for c in domains[k] if eval_atom(a, {k: c})]
            if not domains[k]:
                return False
        else:
            pending[max(pos[k] for k in mentioned)].append(a)

    binding: dict[int, int] = {}

    def search(i: int) -> bool:
        if i == len(order):
            return True
        k = order[i]
        for c in domains[k]:
            binding[k] = c
            if all(eval_atom(a, binding) for a in pending[i]) and search(i + 1):
                return True
        del binding[k]
        return False

    return search(0)


def sat_under(c: Condition, g: GlobalCondition, cap: int = ENUMERATION_CAP) -> bool:
    """Is ``c`` true under at least one valuation drawn from ``g``?"""
    for k in variables(c):
        g.domain(k)
    try:
        dnf = to_dnf(c)
    except DnfBlowup:
        # too many disjuncts to split; search the whole tree for a witness
        return find_counterexample(negate(c), g, cap) is not None
    return any(_conjunct_sat(d, g, cap) for d in dnf.disjuncts)


def find_counterexample(
    c: Condition, g: GlobalCondition, cap: int = ENUMERATION_CAP
) -> dict[int, int] | None:
    """A valuation consistent with ``g`` that makes ``c`` false, if any."""
    order = sorted(variables(c))
    _space(order, g, cap)
    binding: dict[int, int] = {}

    def search(i: int):
        r = _partial(c, binding)
        if r is True:
            return None
        if r is False:
            return dict(binding)
        k = order[i]
        for value in g.domain(k):
            binding[k] = value
            found = search(i + 1)
            if found is not None:
                return found
        del binding[k]
        return None

    witness = search(0)
    if witness is None:
        return None
    # fill variables that the short-circuit never had to touch
    for k in order:
        witness.setdefault(k, g.domain(k)[0])
    return witness


def taut_under(c: Condition, g: GlobalCondition, cap: int = ENUMERATION_CAP) -> bool:
    """Does ``c`` hold under every valuation consistent with ``g``?"""
    return find_counterexample(c, g, cap) is None


def fold(c: Condition) -> Condition:
    """Fold ground atoms, put variables on the left, drop repeated children."""
    if isinstance(c, Atom):
        lhs, rhs = c.lhs, c.rhs
        if lhs > 0 and rhs > 0:
            return TRUE if OPS[c.op](lhs, rhs) else FALSE
        if lhs > 0 and rhs < 0:
            return Atom(rhs, MIRROR[c.op], lhs)
        return c
    if isinstance(c, (And, Or)):
        kids = []
        for ch in c.children:
            f = fold(ch)
            if f not in kids:
                kids.append(f)
        return conj(*kids) if isinstance(c, And) else disj(*kids)
    return c


def simplify(c: Condition, g: GlobalCondition, cap: int = ENUMERATION_CAP) -> Condition:
    if not sat_under(c, g, cap):
        return FALSE
    if taut_under(c, g, cap):
        return TRUE
    return fold(c)


# -- text -------------------------------------------------------------------


def default_term(t: Operand) -> str:
    if isinstance(t, Col):
        return f"#{t.index}"
    return f"x{-t}" if t < 0 else str(t)


def render(
    c: Condition, term: Callable[[Operand], str] = default_term, *, spaced: bool = True
) -> str:
    """Render in the condition text syntax; AND binds tighter than OR.

    ``spaced=False`` drops the blanks around comparison operators (``x4='IT'``).
    """
    if c is TRUE:
        return "TRUE"
    if c is FALSE:
        return "FALSE"
    if isinstance(c, Atom):
        sep = " " if spaced else ""
        return f"{term(c.lhs)}{sep}{c.op}{sep}{term(c.rhs)}"
    if isinstance(c, And):
        return " AND ".join(
            f"({render(ch, term, spaced=spaced)})"
            if isinstance(ch, Or)
            else render(ch, term, spaced=spaced)
            for ch in c.children
        )
    return " OR ".join(render(ch, term, spaced=spaced) for ch in c.children)
