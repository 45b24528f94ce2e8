"""Series arithmetic, curve parsing, valuation bases, good reduction."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacfac.fields import FiniteField, RationalField, field_of_size
from jacfac.ring import (
    Series,
    SubductionError,
    good_reduction,
    parse_curve,
    parse_poly_in_z,
    phi_element,
    valuation_basis,
)

Q = RationalField()


def series(coeffs, K=Q, trunc=60):
    return Series(K, trunc, {e: K.from_int(c) for e, c in coeffs.items()})


# --- series arithmetic -----------------------------------------------------


def test_series_basics():
    s = series({4: 1, 7: 2})
    assert s.valuation() == 4
    assert s[7] == Q.from_int(2) and s[5] == Q.zero
    assert s.add(s.neg()).is_zero()
    assert s.shift(3).valuation() == 7


def test_series_mul_truncation():
    s = series({30: 1}, trunc=50)
    t = series({25: 1}, trunc=50)
    assert s.mul(t).is_zero()  # 55 > 50 is cut
    assert s.mul(series({10: 1}, trunc=50)).valuation() == 40


def test_series_monic():
    s = series({13: 2, 14: 1})
    m, lc = s.monic()
    assert lc == Q.from_int(2)
    assert m[13] == Q.one and m[14] == Q.div(Q.one, Q.from_int(2))


@settings(max_examples=60)
@given(
    st.dictionaries(st.integers(0, 20), st.integers(-5, 5), max_size=5),
    st.dictionaries(st.integers(0, 20), st.integers(-5, 5), max_size=5),
    st.dictionaries(st.integers(0, 20), st.integers(-5, 5), max_size=5),
)
def test_series_ring_laws(a, b, c):
    sa, sb, sc = (series(d, trunc=40) for d in (a, b, c))
    assert sa.mul(sb.add(sc)) == sa.mul(sb).add(sa.mul(sc))
    assert sa.mul(sb.mul(sc)) == sa.mul(sb).mul(sc)
    assert sa.add(sb) == sb.add(sa)


@settings(max_examples=60)
@given(
    st.dictionaries(st.integers(0, 15), st.integers(-5, 5), min_size=1, max_size=4),
    st.dictionaries(st.integers(0, 15), st.integers(-5, 5), min_size=1, max_size=4),
)
def test_series_valuation_additivity(a, b):
    sa, sb = series(a, trunc=40), series(b, trunc=40)
    if sa.is_zero() or sb.is_zero():
        return
    assert sa.mul(sb).valuation() == sa.valuation() + sb.valuation()


# --- parsing ----------------------------------------------------------------


def test_parse_poly():
    assert parse_poly_in_z("z^6") == {6: 1}
    assert parse_poly_in_z("z^9+z^13") == {9: 1, 13: 1}
    assert parse_poly_in_z("2z^4 - z^5 + 3") == {4: 2, 5: -1, 0: 3}
    assert parse_poly_in_z("z") == {1: 1}
    assert parse_poly_in_z("z^4+z^4") == {4: 2}


def test_parse_curve():
    x, y = parse_curve("x=z^6, y=z^9+z^13")
    assert x == {6: 1} and y == {9: 1, 13: 1}
    with pytest.raises(ValueError, match="curve must look like"):
        parse_curve("z^6, z^9")
    with pytest.raises(ValueError, match="cannot parse"):
        parse_curve("x=z^q, y=z^2")


# --- valuation bases --------------------------------------------------------


def test_basis_4_6_13():
    ring = valuation_basis({4: 1}, {6: 1, 7: 1}, Q)
    assert ring.semigroup.generators == (4, 6, 13)
    b13 = ring.basis[13]
    # y^2 - x^3 = 2z^13 + z^14, stored monic
    assert b13[13] == Q.one
    assert b13[14] == Q.div(Q.one, Q.from_int(2))
    assert ring.excluded_primes == frozenset({2})
    assert ring.trunc == 3 * 16


def test_basis_6_9_22():
    ring = valuation_basis({6: 1}, {9: 1, 13: 1}, Q)
    assert ring.semigroup.generators == (6, 9, 22)
    assert ring.basis[22].valuation() == 22


def test_basis_2_3():
    ring = valuation_basis({2: 1}, {3: 1}, Q)
    assert ring.semigroup.generators == (2, 3)
    assert set(ring.basis) == {2, 3}
    assert ring.excluded_primes == frozenset()


def test_basis_6_8_25():
    ring = valuation_basis({6: 1}, {8: 1, 9: 1}, Q)
    assert ring.semigroup.generators == (6, 8, 25)


def test_basis_4_14_31():
    ring = valuation_basis({4: 1}, {14: 1, 17: 1}, Q)
    assert ring.semigroup.generators == (4, 14, 31)


def test_basis_with_multi_term_x():
    ring = valuation_basis({4: 1, 5: 1}, {6: 1}, Q)
    assert ring.semigroup.generators == (4, 6, 13)


def test_basis_rejects_degenerate():
    with pytest.raises(SubductionError, match="coprime"):
        valuation_basis({4: 1}, {8: 1, 12: 1}, Q)


def test_basis_order_independence():
    # swapping x and y cannot change the semigroup or the basis valuations
    r1 = valuation_basis({4: 1}, {6: 1, 7: 1}, Q)
    r2 = valuation_basis({6: 1, 7: 1}, {4: 1}, Q)
    assert r1.semigroup.gaps == r2.semigroup.gaps
    assert set(r1.basis) == set(r2.basis)
    assert all(r1.basis[v] == r2.basis[v] for v in r1.basis)


def test_basis_truncation_stability():
    base = valuation_basis({6: 1}, {9: 1, 13: 1}, Q)
    deeper = valuation_basis(
        {6: 1}, {9: 1, 13: 1}, Q, trunc=base.trunc + base.semigroup.conductor
    )
    assert base.semigroup.gaps == deeper.semigroup.gaps
    for v, s in base.basis.items():
        for e, c in s.coeffs.items():
            assert deeper.basis[v][e] == c


# --- phi elements -----------------------------------------------------------


def test_phi_examples():
    ring = valuation_basis({4: 1}, {6: 1, 7: 1}, Q)
    assert phi_element(ring, 0)[0] == Q.one
    p13 = phi_element(ring, 13)
    assert p13[13] == Q.one and p13[14] == Q.div(Q.one, Q.from_int(2))
    p10 = phi_element(ring, 10)  # 10 = 4 + 6
    assert p10.valuation() == 10
    assert p10 == ring.basis[4].mul(ring.basis[6])
    with pytest.raises(ValueError, match="not in the value semigroup"):
        phi_element(ring, 5)


def test_phi_monic_everywhere():
    ring = valuation_basis({6: 1}, {9: 1, 13: 1}, Q)
    for gamma in range(0, ring.semigroup.conductor + 10):
        if gamma in ring.semigroup:
            p = phi_element(ring, gamma)
            assert p.valuation() == gamma
            assert p.leading_coeff() == Q.one


# --- good reduction ---------------------------------------------------------


def test_good_reduction_examples():
    r_6_9_13 = valuation_basis({6: 1}, {9: 1, 13: 1}, Q)
    assert good_reduction(r_6_9_13, 2) is False
    r_4_6_7 = valuation_basis({4: 1}, {6: 1, 7: 1}, Q)
    assert good_reduction(r_4_6_7, 3) is True
    assert good_reduction(r_4_6_7, 2) is False
    r_shift = valuation_basis({4: 1, 5: 1}, {6: 1}, Q)
    assert good_reduction(r_shift, 2) is True
    assert good_reduction(r_shift, 3) is False


def test_finite_field_ring_construction():
    ring = valuation_basis({4: 1}, {6: 1, 7: 1}, FiniteField(3))
    assert ring.semigroup.generators == (4, 6, 13)
    ring2 = valuation_basis({4: 1, 5: 1}, {6: 1}, field_of_size(4))
    assert ring2.semigroup.generators == (4, 6, 13)
