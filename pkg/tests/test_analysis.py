from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from perimfix.analysis import (
    LambdaOutOfRange,
    SpaceTooSmall,
    check_lemma1,
    fixed_points,
    has_forming_triangle,
    image_of_set,
    is_mlcp,
    lambda_min_contraction,
    lambda_min_perimeter,
    pair_ratio,
    periodic_points,
    prime_period_points,
    triangle_candidates,
    triplet_ratio,
)
from perimfix.metric import HausdorffTable, MultiMap
from perimfix.search import builtin_instance, gen_random_map, gen_random_space, instance_rng, line_space
from samplers import random_instance


def const_map(n, a=0):
    return MultiMap(tuple((a,) for _ in range(n)))


def labels(space, idx):
    return tuple(space.labels[i] for i in idx)


# -- lambda analyzers ---------------------------------------------------------


def test_ex1_is_not_a_contraction():
    space, fmap = builtin_instance("ex1")
    value, (x, y) = lambda_min_contraction(space, fmap)
    assert value == 1 and value >= 1
    table = HausdorffTable(space, fmap)
    # the pair (0, 3) has H = 1 = d
    assert table.value(0, 3) == 1 and space.dist[0][3] == 1
    assert pair_ratio(space, table, x, y) == 1


def test_nadler_gap_contraction_factor():
    space, fmap = builtin_instance("nadler-gap")
    value, w = lambda_min_contraction(space, fmap)
    assert value == 1 and labels(space, w) == ("0", "1")


def test_constant_map_factors_vanish():
    space = gen_random_space(5, 4, 1)
    assert lambda_min_contraction(space, const_map(5))[0] == 0
    assert lambda_min_perimeter(space, const_map(5))[0] == 0


def test_ex1_perimeter_factor():
    space, fmap = builtin_instance("ex1")
    value, w = lambda_min_perimeter(space, fmap)
    assert value == Fraction(3, 4) == oracles.max_perimeter_ratio(space, fmap)
    assert w == (0, 2, 5)
    table = HausdorffTable(space, fmap)
    assert table.value(0, 2) + table.value(2, 5) + table.value(0, 5) == 3
    assert space.dist[0][2] + space.dist[2][5] + space.dist[0][5] == 4


def test_nadler_gap_perimeter_factor():
    space, fmap = builtin_instance("nadler-gap")
    value, w = lambda_min_perimeter(space, fmap)
    assert value == Fraction(3, 8) == oracles.max_perimeter_ratio(space, fmap)
    assert labels(space, w) == ("0", "1", "4")


def test_size_preconditions():
    two = line_space([0, 1])
    with pytest.raises(SpaceTooSmall):
        lambda_min_perimeter(two, MultiMap(((0,), (1,))))
    one = line_space([0])
    with pytest.raises(SpaceTooSmall):
        lambda_min_contraction(one, MultiMap(((0,),)))


def test_is_mlcp_examples():
    space, fmap = builtin_instance("ex1")
    assert is_mlcp(space, fmap, Fraction(3, 4))
    assert not is_mlcp(space, fmap, Fraction(1, 2))
    with pytest.raises(LambdaOutOfRange):
        is_mlcp(space, fmap, 1)
    with pytest.raises(LambdaOutOfRange):
        is_mlcp(space, fmap, Fraction(-1, 8))


# -- set-valued dynamics ------------------------------------------------------


def test_image_of_set_examples():
    space, fmap = builtin_instance("cyclic7")
    assert image_of_set(fmap, (1, 2, 3, 4)) == tuple(range(7))
    assert image_of_set(fmap, (3,)) == fmap.images[3]
    space, fmap = builtin_instance("nadler-gap")
    assert image_of_set(fmap, fmap.images[space.index("4")]) == (0, 1)


def test_periodic_point_examples():
    space, fmap = builtin_instance("nadler-gap")
    assert labels(space, sorted(periodic_points(space, fmap, 1))) == ("0", "1")
    assert prime_period_points(space, fmap, 2) == frozenset()
    space, fmap = builtin_instance("ex1")
    assert periodic_points(space, fmap, 2) == frozenset()
    assert periodic_points(space, fmap, 3) == frozenset(range(6))
    assert prime_period_points(space, fmap, 3) == frozenset(range(6))
    space, fmap = builtin_instance("cyclic7")
    assert 0 in prime_period_points(space, fmap, 2)
    with pytest.raises(ValueError):
        periodic_points(space, fmap, 0)


def test_fixed_point_examples():
    space, fmap = builtin_instance("nadler-gap")
    assert fixed_points(space, fmap) == {0, 1}
    space, fmap = builtin_instance("ex1")
    assert fixed_points(space, fmap) == frozenset()
    full = MultiMap(tuple(tuple(range(6)) for _ in range(6)))
    assert fixed_points(space, full) == frozenset(range(6))


def test_fixed_points_excluded_from_higher_prime_periods():
    space, fmap = builtin_instance("nadler-gap")
    for n in range(2, 6):
        assert not prime_period_points(space, fmap, n) & fixed_points(space, fmap)


# -- forming a triangle -------------------------------------------------------


@pytest.mark.parametrize("name", ["cyclic7", "nadler-gap", "ex1"])
def test_builtins_form_triangles(name):
    space, fmap = builtin_instance(name)
    assert has_forming_triangle(space, fmap) == (True, None)
    assert oracles.forming_triangle(space, fmap)


def test_identity_map_forms_triangles_vacuously():
    space = gen_random_space(5, 3, 0)
    assert has_forming_triangle(space, MultiMap(tuple((i,) for i in range(5)))) == (True, None)


def test_failure_witness_is_recheckable():
    # constant map onto point 0: x = 1, y = 0 has Tz = Tx for the only z
    space = gen_random_space(4, 3, 0)
    ok, witness = has_forming_triangle(space, const_map(4))
    assert not ok and witness == (1, 0)
    table = HausdorffTable(space, const_map(4))
    assert triangle_candidates(space, const_map(4), table, *witness) == []


def test_triangle_bound_is_non_strict():
    # x=0 -> y=1; T1 = {2}; d(1,2) = 1 = H(T0, T1) exactly
    space = line_space([0, 1, 2, 10])
    fmap = MultiMap(((1,), (2,), (3,), (3,)))
    table = HausdorffTable(space, fmap)
    assert table.value(0, 1) == 1 and space.dist[1][2] == 1
    assert triangle_candidates(space, fmap, table, 0, 1) == [2]


# -- lemma 1 ------------------------------------------------------------------


def test_lemma1_examples():
    space, fmap = builtin_instance("ex1")
    c = check_lemma1(space, fmap)
    assert (c.antecedent, c.consequent, c.verdict, c.vacuous) == (True, True, True, False)
    space, fmap = builtin_instance("cyclic7")
    c = check_lemma1(space, fmap)
    assert (c.antecedent, c.consequent, c.verdict, c.vacuous) == (False, True, True, True)
    space, fmap = builtin_instance("nadler-gap")
    assert not check_lemma1(space, fmap).antecedent


# -- properties over random instances -----------------------------------------


@st.composite
def instances(draw):
    seed = draw(st.integers(0, 2**32))
    return random_instance(instance_rng(seed, 0))


@settings(max_examples=150, deadline=None)
@given(instances())
def test_factors_match_brute_force(inst):
    space, fmap = inst
    mlc, pw = lambda_min_contraction(space, fmap)
    mlcp, tw = lambda_min_perimeter(space, fmap)
    assert mlc == oracles.max_pair_ratio(space, fmap)
    assert mlcp == oracles.max_perimeter_ratio(space, fmap)
    assert mlcp <= mlc
    table = HausdorffTable(space, fmap)
    assert pair_ratio(space, table, *pw) == mlc
    assert triplet_ratio(space, table, *tw) == mlcp


@settings(max_examples=150, deadline=None)
@given(instances(), st.fractions(min_value=0, max_value=Fraction(49, 50), max_denominator=50))
def test_is_mlcp_iff_factor_below(inst, lam):
    space, fmap = inst
    mlcp, _ = lambda_min_perimeter(space, fmap)
    assert is_mlcp(space, fmap, lam) == (mlcp <= lam)
    if mlcp < 1:
        assert is_mlcp(space, fmap, mlcp)


@settings(max_examples=150, deadline=None)
@given(instances(), st.integers(1, 5))
def test_periodic_sets_match_brute_force(inst, n):
    space, fmap = inst
    assert periodic_points(space, fmap, 1) == fixed_points(space, fmap)
    per = periodic_points(space, fmap, n)
    prime = prime_period_points(space, fmap, n)
    assert per == {x for x in range(space.size) if x in oracles.power_image(fmap, x, n)}
    assert prime == {x for x in range(space.size) if oracles.prime_period(fmap, x, n)}
    assert prime <= per
    for k in range(1, n):
        assert not prime & periodic_points(space, fmap, k)


@settings(max_examples=150, deadline=None)
@given(instances())
def test_triangle_decider_matches_alpha_definition(inst):
    space, fmap = inst
    ok, witness = has_forming_triangle(space, fmap)
    assert ok == oracles.forming_triangle(space, fmap)
    assert (witness is None) == ok


@settings(max_examples=150, deadline=None)
@given(instances())
def test_lemma1_never_fails(inst):
    space, fmap = inst
    assert check_lemma1(space, fmap).verdict


def test_fractional_metric_factors():
    space = line_space(["0", "1/3", "1/2", "9/4", "5"])
    rng = instance_rng(5, 5)
    for _ in range(20):
        fmap = gen_random_map(space, 1, 3, rng)
        assert lambda_min_perimeter(space, fmap)[0] == oracles.max_perimeter_ratio(space, fmap)
        assert lambda_min_contraction(space, fmap)[0] == oracles.max_pair_ratio(space, fmap)
