import random

import pytest

from ctabledb.algebra import Stats, insert_tuple, join, project, prune, select_, specialize
from ctabledb.condition import FALSE, TRUE, And, Atom, Col, GlobalCondition, Or, variables
from ctabledb.ctable import CTable, CTuple, Schema, apply_valuation, possible_worlds
from ctabledb.errors import SchemaMismatch, UnknownVariable

from exact import exact
from oracle import Join, Proj, Sel, all_valuations, classical, leaves, random_instance

M, F, IT, PR, HR = 1, 2, 3, 4, 5
ALICE, BOB, CECILIA, DAVID, ELLA = 11, 12, 13, 14, 15
MARRIED, SINGLE = 21, 22
G = GlobalCondition({1: [M, F], 2: [M, F], 3: [M, F], 4: [IT, PR]})
EMP = CTable(
    Schema("Emp", ("Name", "Gender", "Mstat", "Dept")),
    (
        CTuple((ALICE, -1, MARRIED, IT)),
        CTuple((BOB, -2, MARRIED, HR)),
        CTuple((CECILIA, -3, MARRIED, HR)),
        CTuple((DAVID, M, MARRIED, -4)),
        CTuple((ELLA, F, SINGLE, -4)),
    ),
)
NAME, GENDER, MSTAT, DEPT = (Col(i) for i in range(4))


def conds(t):
    return [(row.terms, row.local) for row in t.rows]


def atom_set(c):
    if c is TRUE:
        return frozenset()
    return frozenset(c.children if isinstance(c, And) else (c,))


# -- specialize -----------------------------------------------------------------


def test_specialize_variable_cell():
    assert specialize(Atom(DEPT, "=", IT), EMP.rows[3].terms) == Atom(-4, "=", IT)


def test_specialize_constant_cell_is_ground_atom():
    assert specialize(Atom(DEPT, "=", IT), EMP.rows[0].terms) == Atom(IT, "=", IT)


def test_specialize_shared_variable():
    on = Atom(Col(3), "=", Col(7))
    assert specialize(on, EMP.rows[3].terms + EMP.rows[4].terms) == Atom(-4, "=", -4)


# -- select -----------------------------------------------------------------------


def test_select_dept_it_matches_worked_example():
    out = select_(EMP, Atom(DEPT, "=", IT), G)
    assert [(r.terms[0], r.local) for r in out.rows] == [
        (ALICE, TRUE),
        (DAVID, Atom(-4, "=", IT)),
        (ELLA, Atom(-4, "=", IT)),
    ]


def test_select_true_is_identity_on_pruned_table():
    assert select_(EMP, TRUE, G) == EMP


def test_select_drops_unsatisfiable_variable_row():
    stats = Stats()
    out = select_(EMP, Atom(DEPT, "=", HR), G, stats=stats)
    # David and Ella get x4='HR', outside dom(x4)
    assert [r.terms[0] for r in out.rows] == [BOB, CECILIA]
    assert stats.pruned == 2


def test_select_rejects_bad_column():
    with pytest.raises(SchemaMismatch):
        select_(EMP, Atom(Col(9), "=", 1), G)


# -- project ------------------------------------------------------------------


def test_project_name_dept():
    out = project(EMP, ("Name", "Dept"), G)
    assert out.schema.columns == ("Name", "Dept")
    assert len(out) == 5 and all(r.local is TRUE for r in out.rows)


def test_project_all_columns_identity():
    assert project(EMP, range(4), G) == EMP


def test_project_merges_rows_with_or():
    g = GlobalCondition({1: [1, 2]})
    t = CTable(Schema("T", ("A", "B")), (CTuple((7, 1), Atom(-1, "=", 1)), CTuple((7, 2), Atom(-1, "=", 2))))
    out = project(t, [0], g)
    assert out.rows == (CTuple((7,), TRUE),)


def test_project_needs_columns():
    with pytest.raises(SchemaMismatch):
        project(EMP, [], G)


# -- join --------------------------------------------------------------------------


def test_self_join_matches_worked_example():
    on = Atom(Col(3), "=", Col(7))
    joined = join(EMP, EMP, on, G, aliases=("e1", "e2"))
    where = And((Atom(Col(1), "=", M), Atom(Col(5), "=", F)))
    out = project(select_(joined, where, G), ["e1.Name", "e2.Name"], G, names=("Name1", "Name2"))
    got = {r.terms: atom_set(r.local) for r in out.rows}
    assert got == {
        (ALICE, ELLA): {Atom(-1, "=", M), Atom(-4, "=", IT)},
        (BOB, CECILIA): {Atom(-2, "=", M), Atom(-3, "=", F)},
        (CECILIA, BOB): {Atom(-3, "=", M), Atom(-2, "=", F)},
        (DAVID, ALICE): {Atom(-1, "=", F), Atom(-4, "=", IT)},
        (DAVID, ELLA): frozenset(),
    }


def test_join_columns_are_qualified():
    out = join(EMP, EMP, TRUE, G, aliases=("e1", "e2"))
    assert out.schema.columns[:2] == ("e1.Name", "e1.Gender")
    assert out.schema.columns[4:6] == ("e2.Name", "e2.Gender")


def test_join_with_empty_right_table():
    empty = CTable(Schema("E", ("X",)))
    assert len(join(EMP, empty, TRUE, G)) == 0


def test_cross_product_of_complete_tables():
    a = CTable(Schema("A", ("p",)), (CTuple((1,)), CTuple((2,))))
    b = CTable(Schema("B", ("q",)), (CTuple((3,)), CTuple((4,)), CTuple((5,))))
    out = join(a, b, TRUE, G)
    assert len(out) == 6 and all(r.local is TRUE for r in out.rows)


# -- insert ------------------------------------------------------------------------


def test_insert_with_condition():
    SMITH = 16
    g = G.copy()
    g.declare(5, [IT, PR, HR])
    cond = Or((Atom(-5, "=", HR), Atom(-5, "=", PR)))
    out = insert_tuple(EMP, (SMITH, M, SINGLE, -5), g, cond)
    assert out.rows[-1] == CTuple((SMITH, M, SINGLE, -5), cond)
    assert len(out) == 6 and len(EMP) == 5


def test_insert_defaults_to_true():
    out = insert_tuple(EMP, (16, M, SINGLE, HR), G)
    assert out.rows[-1].local is TRUE


def test_insert_unregistered_variable():
    with pytest.raises(UnknownVariable):
        insert_tuple(EMP, (16, M, SINGLE, -9), G)
    with pytest.raises(SchemaMismatch):
        insert_tuple(EMP, (16, M), G)


# -- prune -------------------------------------------------------------------------

# the nine candidate rows of the worked self-join, before pruning
NINE = CTable(
    Schema("Q", ("Name1", "Name2")),
    (
        CTuple((ALICE, ELLA), And((Atom(-1, "=", M), Atom(-4, "=", IT)))),
        CTuple((BOB, CECILIA), And((Atom(-2, "=", M), Atom(-3, "=", F)))),
        CTuple((BOB, ELLA), And((Atom(-2, "=", M), Atom(-4, "=", HR)))),
        CTuple((CECILIA, BOB), And((Atom(-3, "=", M), Atom(-2, "=", F)))),
        CTuple((CECILIA, ELLA), And((Atom(-3, "=", M), Atom(-4, "=", HR)))),
        CTuple((DAVID, ALICE), And((Atom(-1, "=", F), Atom(-4, "=", IT)))),
        CTuple((DAVID, BOB), And((Atom(-2, "=", F), Atom(-4, "=", HR)))),
        CTuple((DAVID, CECILIA), And((Atom(-3, "=", F), Atom(-4, "=", HR)))),
        CTuple((DAVID, ELLA), Atom(-4, "=", -4)),
    ),
)


def test_prune_removes_struck_rows():
    stats = Stats()
    out = prune(NINE, G, stats=stats)
    assert [r.terms for r in out.rows] == [
        (ALICE, ELLA), (BOB, CECILIA), (CECILIA, BOB), (DAVID, ALICE), (DAVID, ELLA)
    ]
    assert stats.pruned == 4
    assert out.rows[-1].local is TRUE


def test_prune_fixpoint_on_true_table():
    assert prune(EMP, G) == EMP


def test_prune_domain_tautology_becomes_true():
    t = CTable(Schema("T", ("A",)), (CTuple((1,), Or((Atom(-4, "=", IT), Atom(-4, "=", PR)))),))
    assert prune(t, G).rows[0].local is TRUE


# -- properties ----------------------------------------------------------------------


def _all_vars(q):
    ks = set()
    for t in leaves(q):
        ks |= t.variables()
    return ks


def test_operators_commute_with_valuations():
    rng = random.Random(20240611)
    checked = 0
    for _ in range(300):
        inst = random_instance(rng)
        answer = exact(inst.query, inst.g)
        for v in all_valuations(inst.g, _all_vars(inst.query)):
            assert apply_valuation(answer, v).rows == classical(inst.query, v)
            checked += 1
    assert checked > 300


def test_prune_is_idempotent_and_keeps_worlds():
    rng = random.Random(7)
    for _ in range(200):
        inst = random_instance(rng)
        t = inst.tables[0]
        once = prune(t, inst.g)
        assert prune(once, inst.g) == once
        assert possible_worlds(once, inst.g) == possible_worlds(t, inst.g)
        assert possible_worlds(select_(t, TRUE, inst.g), inst.g) == possible_worlds(once, inst.g)


def test_join_size_bound():
    rng = random.Random(3)
    for _ in range(200):
        inst = random_instance(rng)
        left, right = inst.tables
        out = join(left, right, TRUE, inst.g)
        assert len(out) <= len(left) * len(right)
