"""Canonical trees, enumeration, automorphism groups, and the brute-force
oracles that back the exact series tables."""

import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import polyatree as pt
from polyatree.errors import ResourceCapError, UsageError

# nested lists: a node is the list of its children
nested = st.recursive(st.just([]), lambda ch: st.lists(ch, max_size=4), max_leaves=10)


def shuffled(obj, rng):
    if not obj:
        return []
    out = [shuffled(c, rng) for c in obj]
    rng.shuffle(out)
    return out


# ---------------------------------------------------------------------------
# canonical form and serialization


def test_leaf_is_interned():
    assert pt.leaf() is pt.canonical_form([])
    assert pt.leaf().size == 1
    assert pt.leaf().parens == "()"


def test_parens_roundtrip_is_identity():
    for t in pt.enumerate_trees(7):
        assert pt.parse_parens(t.parens) is t


def test_level_sequence_roundtrip_is_identity():
    for t in pt.enumerate_trees(7):
        assert pt.parse_level_sequence(t.to_level_sequence()) is t


def test_level_sequence_format():
    star = pt.canonical_form([[], [], []])
    assert star.to_level_sequence() == "1 2 2 2"
    assert pt.parse_level_sequence("0 1 1 1") is star  # depths may start anywhere


def test_children_flat_order():
    t = pt.parse_parens("((())()())")
    kids = t.children
    assert [c.size for c in kids] == [2, 1, 1]
    assert len(t) == t.size == 5


@given(nested)
def test_canonical_form_is_order_invariant(obj):
    rng = random.Random(12345)
    base = pt.canonical_form(obj)
    for _ in range(3):
        assert pt.canonical_form(shuffled(obj, rng)) is base


@given(nested)
def test_parens_roundtrip_random(obj):
    t = pt.canonical_form(obj)
    assert pt.parse_parens(t.parens) is t
    assert pt.parse_level_sequence(t.to_level_sequence()) is t


@pytest.mark.parametrize("bad", ["", "(", ")(", "(()", "(())()", "(x)"])
def test_parse_parens_rejects(bad):
    with pytest.raises(UsageError):
        pt.parse_parens(bad)


@pytest.mark.parametrize("bad", ["", "1 3", "1 2 4", "2 1", "1 1"])
def test_parse_level_sequence_rejects(bad):
    with pytest.raises(UsageError):
        pt.parse_level_sequence(bad)


def test_canonical_form_rejects_non_trees():
    with pytest.raises(UsageError):
        pt.canonical_form(42)


def test_compare_canonical():
    a = pt.parse_parens("((()))")
    b = pt.parse_parens("(()())")
    assert pt.compare_canonical(a, a) == 0
    assert pt.compare_canonical(a, b) + pt.compare_canonical(b, a) == 0
    # size descending first: a larger tree precedes a smaller one
    assert pt.compare_canonical(a, pt.leaf()) < 0


# ---------------------------------------------------------------------------
# enumeration


def test_enumeration_counts_match_series():
    t = pt.polya_counts(11)
    for n in range(1, 12):
        trees = pt.enumerate_trees(n)
        assert len(trees) == t[n - 1]
        assert len(set(trees)) == len(trees)
        assert all(x.size == n for x in trees)


def test_enumeration_cap():
    with pytest.raises(ResourceCapError):
        pt.enumerate_trees(17)
    with pytest.raises(ResourceCapError):
        pt.enumerate_forests(15)


def test_enumerate_forests_small():
    assert pt.enumerate_forests(0) == (pt.ForestSpec([]),)
    assert pt.enumerate_forests(1) == ()
    two = pt.enumerate_forests(2)
    assert len(two) == 1 and two[0].classes == ((pt.leaf(), 2),)
    # size 4: {leaf x4}, {leaf x2 + nothing else}? no - exactly multisets with
    # every distinct tree repeated: leaf^4, path2^2
    four = pt.enumerate_forests(4)
    assert len(four) == 2


def test_forest_spec_validation():
    with pytest.raises(UsageError):
        pt.ForestSpec([(pt.leaf(), 1)])
    with pytest.raises(UsageError):
        pt.ForestSpec([(pt.leaf(), 2), (pt.leaf(), 3)])


# ---------------------------------------------------------------------------
# automorphisms


def test_derangements_golden():
    assert [pt.derangements(k) for k in range(8)] == [1, 0, 1, 2, 9, 44, 265, 1854]


def test_aut_order_examples():
    assert pt.aut_order(pt.leaf()) == 1
    chain = pt.parse_parens("((((()))))")
    assert pt.aut_order(chain) == 1
    star = pt.parse_parens("(()()())")
    assert pt.aut_order(star) == factorial(3)
    double_star = pt.canonical_form([[[], []], [[], []]])
    assert pt.aut_order(double_star) == 2 * 2 * 2  # swap copies, swap leaves inside each


def test_aut_order_matches_group_listing():
    for n in range(1, 8):
        for t in pt.enumerate_trees(n):
            assert len(pt.aut_elements(t)) == pt.aut_order(t)


def test_aut_elements_cap():
    big = pt.canonical_form([[]] * 8)  # |Aut| = 8! = 40320 > 20000
    with pytest.raises(ResourceCapError):
        pt.aut_elements(big)


def test_identity_element():
    for t in pt.enumerate_trees(6):
        e = pt.identity_element(t)
        assert e.is_identity()
        assert e.fixed_count() == t.size
        assert e.as_permutation() == tuple(range(t.size))


def test_as_permutation_is_bijective_and_counts_fixed_points():
    for n in range(1, 7):
        for t in pt.enumerate_trees(n):
            for e in pt.aut_elements(t):
                perm = e.as_permutation()
                assert sorted(perm) == list(range(t.size))
                assert sum(1 for i, p in enumerate(perm) if i == p) == e.fixed_count()


def test_exactly_one_identity_per_group():
    for t in pt.enumerate_trees(6):
        assert sum(1 for e in pt.aut_elements(t) if e.is_identity()) == 1


def test_fixed_point_polynomial_star_example():
    # 3-leaf star: identity fixes 4 nodes, three transpositions fix 2,
    # two 3-cycles fix 1: t(u) = (u^4 + 3u^2 + 2u)/6
    star = pt.parse_parens("(()()())")
    expect = pt.UPolynomial([0, Fraction(2, 6), Fraction(3, 6), 0, Fraction(1, 6)])
    assert pt.fixed_point_polynomial(star) == expect


def test_fixed_point_polynomial_properties():
    for n in range(1, 9):
        for t in pt.enumerate_trees(n):
            p = pt.fixed_point_polynomial(t)
            assert p(1) == 1
            assert p.degree == t.size
            assert p.coeff(t.size) == Fraction(1, pt.aut_order(t))
            assert p.coeff(0) == 0


def test_fixed_point_polynomial_is_group_average():
    for n in range(1, 8):
        for t in pt.enumerate_trees(n):
            els = pt.aut_elements(t)
            avg = pt.UPolynomial.from_pairs((e.fixed_count(), Fraction(1, len(els))) for e in els)
            assert avg == pt.fixed_point_polynomial(t)


def test_orbit_count_is_derivative_at_one():
    for n in range(1, 10):
        for t in pt.enumerate_trees(n):
            assert pt.orbit_count(t) == pt.fixed_point_polynomial(t).derivative()(1)


def test_orbit_sums_match_pointed_series():
    p = pt.pointed_series(9)
    for n in range(1, 10):
        assert sum(pt.orbit_count(t) for t in pt.enumerate_trees(n)) == p[n - 1]


# ---------------------------------------------------------------------------
# oracles against the series tables


def test_dn_oracle_matches_weights():
    d = pt.dforest_weights(10)
    for n in range(11):
        assert pt.dn_oracle(n) == d[n]


def test_tcn_oracle_matches_polynomials():
    table = pt.ctree_polynomials(9)
    for n in range(1, 10):
        assert pt.tcn_polynomial_oracle(n) == table.row(n)


def test_forest_weight_closed_form():
    empty = pt.ForestSpec([])
    assert pt.forest_weight(empty) == 1
    pair = pt.ForestSpec([(pt.leaf(), 2)])
    assert pt.forest_weight(pair) == Fraction(1, 2)
    # weight = prod derangements(m)/m!
    f = pt.ForestSpec([(pt.leaf(), 3), (pt.parse_parens("(())"), 2)])
    assert pt.forest_weight(f) == Fraction(2, 6) * Fraction(1, 2)


def test_forest_weight_oracle_definitional():
    # fixed-point-free fraction of the forest automorphism group
    for n in range(7):
        for f in pt.enumerate_forests(n):
            assert pt.forest_weight_oracle(f) == pt.forest_weight(f)


def test_forest_weight_oracle_cap():
    f = pt.ForestSpec([(pt.leaf(), 7)])
    with pytest.raises(ResourceCapError):
        pt.forest_weight_oracle(f)


def test_forest_aut_order():
    f = pt.ForestSpec([(pt.leaf(), 3), (pt.parse_parens("(())"), 2)])
    assert pt.forest_aut_order(f) == factorial(3) * factorial(2)
