import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctabledb.condition import (
    COMPLEMENT,
    FALSE,
    TRUE,
    And,
    Atom,
    GlobalCondition,
    Or,
    bind,
    complement,
    conj,
    disj,
    eval_ground,
    negate,
    sat_under,
    simplify,
    taut_under,
    to_dnf,
    variables,
)
from ctabledb.errors import DnfBlowup, EnumerationCap, UnboundVariable, UnknownVariable

from oracle import all_valuations, holds

# dictionary codes used by the Emp examples
M, F, IT, PR, HR = 1, 2, 3, 4, 5
x1, x2, x3, x4 = -1, -2, -3, -4

EMP_G = GlobalCondition({1: [M, F], 2: [M, F], 3: [M, F], 4: [IT, PR]})


def a(lhs, op, rhs):
    return Atom(lhs, op, rhs)


# -- strategies -------------------------------------------------------------

OPS = sorted(COMPLEMENT)
terms = st.one_of(st.sampled_from([-1, -2, -3, -4]), st.integers(1, 4))
atoms_st = st.builds(Atom, terms, st.sampled_from(OPS), terms)
conditions = st.recursive(
    st.one_of(atoms_st, st.just(TRUE), st.just(FALSE)),
    lambda kids: st.one_of(
        st.lists(kids, min_size=2, max_size=3).map(lambda cs: And(tuple(cs))),
        st.lists(kids, min_size=2, max_size=3).map(lambda cs: Or(tuple(cs))),
    ),
    max_leaves=8,
)
domains = st.fixed_dictionaries(
    {k: st.sets(st.integers(1, 4), min_size=1, max_size=4) for k in (1, 2, 3, 4)}
).map(GlobalCondition)


def brute_sat(c, g):
    return any(holds(c, (), v) for v in all_valuations(g, variables(c)))


def brute_taut(c, g):
    return all(holds(c, (), v) for v in all_valuations(g, variables(c)))


# -- to_dnf -----------------------------------------------------------------


def test_dnf_of_true_is_one_empty_disjunct():
    assert to_dnf(TRUE).disjuncts == ((),)


def test_dnf_of_false_is_empty():
    assert to_dnf(FALSE).disjuncts == ()


def test_dnf_of_join_condition_is_single_disjunct():
    c = And((a(x2, "=", M), a(x3, "=", F)))
    assert to_dnf(c).disjuncts == ((a(x2, "=", M), a(x3, "=", F)),)


def test_dnf_distributes_left_to_right():
    A, B = -1, -2
    c = And((Or((a(A, "=", 1), a(A, "=", 2))), a(B, "=", 3)))
    assert to_dnf(c).disjuncts == (
        (a(A, "=", 1), a(B, "=", 3)),
        (a(A, "=", 2), a(B, "=", 3)),
    )


def test_dnf_blowup_is_reported():
    clause = lambda k: Or(tuple(a(-k, "=", c) for c in (1, 2, 3, 4)))
    c = And(tuple(clause(k) for k in range(1, 8)))  # 4**7 disjuncts
    with pytest.raises(DnfBlowup):
        to_dnf(c)
    assert len(to_dnf(c, cap=4**7).disjuncts) == 4**7


def test_sat_survives_dnf_blowup():
    clause = lambda k: Or(tuple(a(-k, "=", c) for c in (1, 2, 3, 4)))
    wide = And(tuple(clause(k) for k in range(1, 8)))
    g = GlobalCondition({k: [1, 2, 3, 4, 5] for k in range(1, 8)})
    assert sat_under(wide, g)
    assert not sat_under(And((wide, a(-7, "=", 5))), g)
    g5 = GlobalCondition({k: [5] for k in range(1, 8)})
    assert not sat_under(wide, g5)


@settings(max_examples=300, deadline=None)
@given(conditions)
def test_dnf_soundness(c):
    dnf = to_dnf(c)
    g = GlobalCondition({k: [1, 2, 3, 4] for k in (1, 2, 3, 4)})
    for v in all_valuations(g, variables(c)):
        assert eval_ground(c, v) == eval_ground(dnf, v)


# -- eval_ground --------------------------------------------------------------


def test_eval_single_atom():
    assert eval_ground(a(x4, "=", 1), {4: 1}) is True


def test_eval_conjunction_false():
    assert eval_ground(And((a(x2, "=", 1), a(x3, "=", 2))), {2: 2, 3: 2}) is False


def test_eval_join_tuple_condition():
    # x1='F' AND x4='IT' encoded as x1=2 AND x4=1
    c = And((a(x1, "=", 2), a(x4, "=", 1)))
    assert eval_ground(c, {1: 2, 4: 1}) is True


def test_eval_unbound_variable():
    with pytest.raises(UnboundVariable):
        eval_ground(Or((a(x1, "=", 1), a(x2, "=", 1))), {1: 1})


# -- sat_under / taut_under ------------------------------------------------------


def test_sat_rejects_value_outside_domain():
    assert not sat_under(And((a(x2, "=", M), a(x4, "=", HR))), EMP_G)


def test_sat_domain_clause():
    assert sat_under(Or((a(x4, "=", IT), a(x4, "=", PR))), EMP_G)


def test_sat_order_atom_without_witness():
    g = GlobalCondition({1: [3, 4], 2: [1, 2]})
    c = a(x1, "<", x2)
    assert brute_sat(c, g) is False  # oracle over the 4 pairs
    assert sat_under(c, g) is False


def test_sat_unknown_variable():
    with pytest.raises(UnknownVariable):
        sat_under(a(-9, "=", 1), EMP_G)


def test_sat_enumeration_cap():
    g = GlobalCondition({k: range(1, 11) for k in range(1, 8)})
    chain = And(tuple(a(-k, "!=", -(k + 1)) for k in range(1, 7)))
    with pytest.raises(EnumerationCap):
        sat_under(chain, g, cap=10**6)
    assert sat_under(chain, g, cap=10**7)


def test_taut_shared_variable():
    assert taut_under(a(x4, "=", x4), EMP_G)


def test_taut_domain_clause():
    assert taut_under(Or((a(x1, "=", M), a(x1, "=", F))), EMP_G)


def test_taut_counterexample():
    assert not taut_under(a(x2, "=", M), EMP_G)


def test_taut_enumeration_cap():
    g = GlobalCondition({k: range(1, 11) for k in range(1, 8)})
    c = Or(tuple(a(-k, "=", 1) for k in range(1, 8)))
    with pytest.raises(EnumerationCap):
        taut_under(c, g)


@settings(max_examples=300, deadline=None)
@given(conditions, domains)
def test_sat_and_taut_match_enumeration(c, g):
    assert sat_under(c, g) == brute_sat(c, g)
    assert taut_under(c, g) == brute_taut(c, g)
    # duality: tautology iff the negation has no model
    assert taut_under(c, g) == (not sat_under(negate(c), g))


# -- simplify -----------------------------------------------------------------


def test_simplify_contradiction():
    assert simplify(And((a(x2, "=", F), a(x4, "=", HR))), EMP_G) is FALSE


def test_simplify_folds_ground_atoms():
    assert simplify(And((a(5, "=", 5), a(x1, "=", M))), EMP_G) == a(x1, "=", M)


def test_simplify_domain_tautology():
    assert simplify(Or((a(x4, "=", IT), a(x4, "=", PR))), EMP_G) is TRUE


def test_simplify_puts_variable_left():
    assert simplify(a(IT, "=", x4), EMP_G) == a(x4, "=", IT)
    assert simplify(a(2, "<", x1), GlobalCondition({1: [1, 2, 3]})) == a(x1, ">", 2)


@settings(max_examples=300, deadline=None)
@given(conditions, domains)
def test_simplify_preserves_semantics(c, g):
    s = simplify(c, g)
    for v in all_valuations(g, variables(c)):
        assert holds(c, (), v) == holds(s, (), v)


# -- bind / complement ------------------------------------------------------------


def test_bind_substitutes_without_folding():
    assert bind(a(x4, "=", IT), {4: IT}) == a(IT, "=", IT)
    assert bind(a(x1, "=", x2), {1: 5}) == a(5, "=", x2)
    assert bind(TRUE, {1: 1}) is TRUE


@given(atoms_st, st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_complement_closure(atom, v1, v2, v3, v4):
    v = {1: v1, 2: v2, 3: v3, 4: v4}
    assert eval_ground(atom, v) != eval_ground(complement(atom), v)


def test_conj_and_disj_flatten_and_absorb():
    p, q, r = a(x1, "=", 1), a(x2, "=", 1), a(x3, "=", 1)
    assert conj(p, TRUE, conj(q, r)) == And((p, q, r))
    assert conj(p, FALSE) is FALSE
    assert disj(p, disj(q, r)) == Or((p, q, r))
    assert disj(FALSE, p) == p
    assert disj(p, TRUE) is TRUE
    assert conj() is TRUE and disj() is FALSE


def test_and_or_need_two_children():
    with pytest.raises(ValueError):
        And((a(x1, "=", 1),))


def test_global_condition_domains_sorted_and_deduplicated():
    g = GlobalCondition({4: [4, 3, 4]})
    assert g.domain(4) == (3, 4)
    with pytest.raises(ValueError):
        g.declare(5, [])
    with pytest.raises(UnknownVariable):
        g.domain(6)


def test_enumeration_oracle_agrees_on_a_fixed_example():
    g = GlobalCondition({1: [1, 2, 3], 2: [1, 2, 3]})
    c = Or((a(x1, "<", x2), a(x1, "=", 3)))
    truth = [holds(c, (), {1: p, 2: q}) for p, q in itertools.product((1, 2, 3), repeat=2)]
    assert sat_under(c, g) == any(truth)
    assert taut_under(c, g) == all(truth)
