"""Topological encodings and value semigroups."""

from __future__ import annotations

from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacfac.semigroup import (
    CableParams,
    NewtonPairs,
    a_degree_bound,
    cable_to_newton,
    exponents_to_newton,
    generators_to_exponents,
    newton_to_cable,
    newton_to_exponents,
    semigroup_from_newton,
    semigroup_generate,
)

# --- strategies -----------------------------------------------------------


@st.composite
def newton_pairs(draw, max_length: int = 3) -> NewtonPairs:
    length = draw(st.integers(1, max_length))
    r, s = [], []
    for i in range(length):
        ri = draw(st.integers(2, 4))
        si = draw(st.integers(1, 7).filter(lambda v, ri=ri: gcd(v, ri) == 1))
        r.append(ri)
        s.append(si)
    return NewtonPairs(tuple(r), tuple(s))


@st.composite
def characteristic_newton_pairs(draw) -> NewtonPairs:
    """Newton pairs that arise from genuine characteristic exponents:
    every s_i >= 1, s_1 >= 2 and s_1 != r_1 (so a swap is well defined)."""
    p = draw(newton_pairs())
    s1 = draw(st.integers(2, 9).filter(lambda v: gcd(v, p.r[0]) == 1 and v != p.r[0]))
    return NewtonPairs(p.r, (s1,) + p.s[1:])


# --- conversions ----------------------------------------------------------


def test_cable_params_torus_cable():
    cab = newton_to_cable(NewtonPairs((3, 2), (2, 1)))
    assert cab.a == (2, 13)
    assert cab.link_str() == "Cab(13,2)T(3,2)"


def test_cable_params_second_series():
    cab = newton_to_cable(NewtonPairs((3, 2), (2, 3)))
    assert cab.a == (2, 15)
    assert cab.link_str() == "Cab(15,2)T(3,2)"


def test_cable_params_single_pair_is_torus_knot():
    cab = newton_to_cable(NewtonPairs((3,), (2,)))
    assert cab.a == (2,)
    assert cab.link_str() == "T(3,2)"


def test_exponents_4_6_7():
    pairs = exponents_to_newton((4, 6, 7))
    assert pairs == NewtonPairs((2, 2), (3, 1))
    # cross-check: same cable presentation as the (r1 > s1) convention
    assert newton_to_cable(pairs).link_str() == "Cab(13,2)T(3,2)"


def test_exponents_6_9_13_both_conventions_agree():
    pairs = exponents_to_newton((6, 9, 13))
    assert pairs == NewtonPairs((2, 3), (3, 4))
    cab = newton_to_cable(pairs)
    assert cab.link_str() == "Cab(22,3)T(3,2)"
    # the x<->y swapped convention carries the same cable parameters
    swapped = NewtonPairs((3, 3), (2, 4))
    assert newton_to_cable(swapped).pairs() == cab.pairs()


def test_exponents_2_3():
    assert exponents_to_newton((2, 3)) == NewtonPairs((2,), (3,))


def test_exponents_reject_multiplicity_not_first():
    with pytest.raises(ValueError, match="beta_1 > e"):
        exponents_to_newton((6, 4, 7))


def test_exponents_reject_non_unibranch():
    with pytest.raises(ValueError, match="unibranch"):
        exponents_to_newton((4, 6))


def test_exponents_reject_divisible_step():
    with pytest.raises(ValueError, match="not a characteristic exponent"):
        exponents_to_newton((4, 8, 9))


def test_newton_pairs_validation():
    with pytest.raises(ValueError, match="gcd"):
        NewtonPairs((4, 2), (2, 1))
    with pytest.raises(ValueError, match="positive"):
        NewtonPairs((3,), (0,))
    with pytest.raises(ValueError, match="equal length"):
        NewtonPairs((3, 2), (2,))


# --- semigroups -----------------------------------------------------------


def test_semigroup_4_6_13():
    sg = semigroup_generate([4, 6, 13])
    assert sg.delta == 8
    assert sg.conductor == 16
    assert sg.gaps == (1, 2, 3, 5, 7, 9, 11, 15)


def test_semigroup_2_3():
    sg = semigroup_generate([2, 3])
    assert (sg.delta, sg.conductor, sg.gaps) == (1, 2, (1,))


def test_semigroup_6_9_22():
    sg = semigroup_generate([6, 9, 22])
    assert sg.delta == 24
    assert sg.conductor == 48


def test_semigroup_rejects_gcd():
    with pytest.raises(ValueError, match="gcd"):
        semigroup_generate([4, 6])


def test_semigroup_full_integers():
    sg = semigroup_generate([1])
    assert (sg.delta, sg.conductor, sg.gaps) == (0, 0, ())
    assert 0 in sg and 1 in sg


def test_membership_and_minimal_generators():
    sg = semigroup_generate([4, 6, 13, 17])  # 17 = 4 + 13 is redundant
    assert sg.minimal_generators() == (4, 6, 13)
    assert 13 in sg and 15 not in sg and -1 not in sg
    assert all(n in sg for n in range(sg.conductor, sg.conductor + 40))


def test_semigroup_from_newton_4_6_13():
    sg = semigroup_from_newton(NewtonPairs((2, 2), (3, 1)))
    assert sg.generators == (4, 6, 13)
    # swapped convention: same semigroup
    sg2 = semigroup_from_newton(NewtonPairs((3, 2), (2, 1)))
    assert sg2.gaps == sg.gaps


def test_semigroup_from_newton_6_8_25():
    pairs = exponents_to_newton((6, 8, 9))
    assert pairs == NewtonPairs((3, 2), (4, 1))
    sg = semigroup_from_newton(pairs)
    assert sg.generators == (6, 8, 25)
    assert newton_to_cable(pairs).link_str() == "Cab(25,2)T(4,3)"


def test_generators_to_exponents_roundtrip():
    for gens, exps in [
        ((4, 6, 13), (4, 6, 7)),
        ((6, 9, 22), (6, 9, 13)),
        ((6, 8, 25), (6, 8, 9)),
        ((2, 3), (2, 3)),
        ((4, 14, 31), (4, 14, 17)),
    ]:
        assert generators_to_exponents(semigroup_generate(gens)) == exps


def test_generators_to_exponents_rejects_non_plane_curve():
    # <3, 5> is a plane-curve semigroup; <5, 6, 7, 8, 9> is not (4 = too many
    # minimal generators for any gcd chain from multiplicity 5).
    with pytest.raises(ValueError, match="not a plane-curve semigroup"):
        generators_to_exponents(semigroup_generate([5, 6, 7, 8, 9]))


# --- a-degree bound -------------------------------------------------------


def test_a_degree_bound_examples():
    assert a_degree_bound(NewtonPairs((3, 2), (2, 1))) == 3
    assert a_degree_bound(NewtonPairs((4, 2), (3, 1))) == 5  # Cab(25,2)T(4,3)
    assert a_degree_bound(NewtonPairs((5,), (1,))) == 0


# --- properties -----------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(newton_pairs())
def test_conductor_is_twice_delta(pairs):
    sg = semigroup_from_newton(pairs)
    assert sg.conductor == 2 * sg.delta


@settings(max_examples=150)
@given(st.integers(2, 12), st.integers(2, 12))
def test_torus_delta_formula(r, s):
    if gcd(r, s) != 1:
        return
    sg = semigroup_from_newton(NewtonPairs((r,), (s,)))
    assert sg.delta == (r - 1) * (s - 1) // 2


@settings(max_examples=100, deadline=None)
@given(newton_pairs())
def test_regeneration_is_idempotent(pairs):
    sg = semigroup_from_newton(pairs)
    upper = sg.conductor + sg.multiplicity() + 1
    sg2 = semigroup_generate([n for n in range(1, upper) if n in sg])
    assert sg2.gaps == sg.gaps and sg2.conductor == sg.conductor


@settings(max_examples=150)
@given(newton_pairs())
def test_cable_roundtrip(pairs):
    assert cable_to_newton(newton_to_cable(pairs)) == pairs


@settings(max_examples=150)
@given(characteristic_newton_pairs())
def test_exponent_roundtrip(pairs):
    normalized = pairs if pairs.s[0] > pairs.r[0] else pairs.swapped()
    assert exponents_to_newton(newton_to_exponents(pairs)) == normalized


@settings(max_examples=100, deadline=None)
@given(characteristic_newton_pairs())
def test_swap_preserves_semigroup_and_cable(pairs):
    swapped = pairs.swapped()
    assert semigroup_from_newton(swapped).gaps == semigroup_from_newton(pairs).gaps
    assert newton_to_cable(swapped).pairs() == newton_to_cable(pairs).pairs()


@settings(max_examples=100, deadline=None)
@given(newton_pairs())
def test_multiplicity_is_smallest_generator(pairs):
    sg = semigroup_from_newton(pairs)
    assert sg.multiplicity() == pairs.multiplicity()
    assert a_degree_bound(pairs) == sg.multiplicity() - 1
