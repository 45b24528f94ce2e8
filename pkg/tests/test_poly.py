"""Multivariate polynomial arithmetic and substitution."""

from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from jacfac.fields import FiniteField, RationalField
from jacfac.poly import PolyRing

Q = PolyRing(RationalField())
F7 = PolyRing(FiniteField(7))


@st.composite
def polys(draw, ring=F7, max_vars=4, max_terms=5, max_deg=3):
    out = ring.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        deg = draw(st.integers(0, max_deg))
        mono = tuple(sorted(draw(st.integers(0, max_vars - 1)) for _ in range(deg)))
        coeff = ring.K.from_int(draw(st.integers(-10, 10)))
        out = ring.add(out, {mono: coeff} if not ring.K.is_zero(coeff) else {})
    return out


def test_basic_shapes():
    p = Q.add(Q.var(0), Q.from_int(2))  # v0 + 2
    q = Q.sub(Q.var(0), Q.from_int(2))  # v0 - 2
    prod = Q.mul(p, q)
    assert prod == {(0, 0): Q.K.one, (): Q.K.from_int(-4)}
    assert Q.degree(prod) == 2
    assert Q.vars_used(prod) == {0}
    assert not Q.is_constant(prod)
    assert Q.is_constant(Q.from_int(5)) and Q.is_constant(Q.zero())


def test_substitute_simple():
    # v1 := v0^2 + 1 in  v1^2 ->  (v0^2+1)^2
    p = {(1, 1): Q.K.one}
    sub = Q.add(Q.mul(Q.var(0), Q.var(0)), Q.one())
    got = Q.substitute(p, {1: sub})
    assert got == Q.mul(sub, sub)


def test_substitute_keeps_other_vars():
    p = {(1, 2): Q.K.one, (2,): Q.K.from_int(3)}
    got = Q.substitute(p, {1: Q.from_int(2)})
    assert got == {(2,): Q.K.from_int(5)}


@settings(max_examples=80)
@given(polys(), polys(), polys())
def test_ring_laws(a, b, c):
    R = F7
    assert R.mul(a, R.add(b, c)) == R.add(R.mul(a, b), R.mul(a, c))
    assert R.mul(a, R.mul(b, c)) == R.mul(R.mul(a, b), c)
    assert R.add(a, b) == R.add(b, a)
    assert R.sub(a, a) == R.zero()


@settings(max_examples=80)
@given(polys(), polys(), st.lists(st.integers(0, 6), min_size=4, max_size=4))
def test_substitution_commutes_with_evaluation(p, q, values):
    R = F7
    assign = {i: v for i, v in enumerate(values)}
    target = 1  # replace v1 by q
    subbed = R.substitute(p, {target: q})
    assign2 = dict(assign)
    assign2[target] = R.evaluate(q, assign)
    assert R.evaluate(subbed, assign) == R.evaluate(p, assign2)


@settings(max_examples=40)
@given(polys())
def test_map_coefficients_roundtrip(p):
    # F7 -> Q -> F7 via integer lift
    lifted = F7.map_coefficients(p, lambda c: Q.K.from_int(c), Q)
    back = Q.map_coefficients(lifted, lambda c: F7.K.from_int(int(c)), F7)
    assert back == p


def test_to_string():
    p = Q.add(Q.mul(Q.var(1), Q.var(1)), Q.from_int(-1))
    s = Q.to_string(p)
    assert "v1*v1" in s and "-1" in s
