"""Field arithmetic: exhaustive axioms for small fields, rationals, helpers."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacfac.fields import (
    FiniteField,
    RationalField,
    field_of_size,
    rational_prime_factors,
)

SCHEDULE = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32]


@pytest.mark.parametrize("q", SCHEDULE)
def test_field_axioms(q):
    f = field_of_size(q)
    assert f.size == q
    els = list(f.elements())
    assert len(els) == q
    sample = els if q <= 9 else els[:3] + els[q // 2 : q // 2 + 3] + els[-3:]
    for a, b in itertools.product(sample, repeat=2):
        assert f.add(a, b) == f.add(b, a)
        assert f.mul(a, b) == f.mul(b, a)
        assert f.add(a, f.neg(a)) == f.zero
        assert f.sub(a, b) == f.add(a, f.neg(b))
        if b != f.zero:
            assert f.mul(f.div(a, b), b) == a
    for a, b, c in itertools.product(sample, repeat=3):
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
        assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
        assert f.add(a, f.add(b, c)) == f.add(f.add(a, b), c)


@pytest.mark.parametrize("q", SCHEDULE)
def test_inverses_and_frobenius(q):
    f = field_of_size(q)
    for a in f.elements():
        if a != f.zero:
            assert f.mul(a, f.inv(a)) == f.one
        # x^q = x in F_q
        acc = a
        for _ in range(q - 1):
            acc = f.mul(acc, a)
        assert acc == a


@pytest.mark.parametrize("q", [4, 8, 9, 16, 25, 27, 32])
def test_multiplicative_group_is_cyclic(q):
    f = field_of_size(q)
    orders = []
    for a in f.elements():
        if a == f.zero:
            continue
        acc, order = a, 1
        while acc != f.one:
            acc = f.mul(acc, a)
            order += 1
        assert (q - 1) % order == 0
        orders.append(order)
    assert max(orders) == q - 1


def test_prime_subfield_embedding():
    f = field_of_size(9)
    assert f.from_int(3) == f.zero
    assert f.from_int(4) == f.one
    assert f.add(f.one, f.add(f.one, f.one)) == f.zero  # char 3


def test_finite_field_errors():
    with pytest.raises(ValueError, match="not prime"):
        FiniteField(6)
    with pytest.raises(ValueError, match="on file"):
        FiniteField(7, 2)
    with pytest.raises(ValueError, match="not a prime power"):
        field_of_size(12)
    with pytest.raises(ZeroDivisionError):
        field_of_size(5).inv(0)


def test_rationals():
    f = RationalField()
    half = f.div(f.one, f.from_int(2))
    assert f.add(half, half) == f.one
    assert f.mul(f.from_int(3), half) == f.from_int(3) / 2
    assert f.is_zero(f.sub(half, half))
    with pytest.raises(ZeroDivisionError):
        f.inv(f.zero)


@settings(max_examples=200)
@given(st.integers(-40, 40), st.integers(1, 40))
def test_rational_prime_factors(num, den):
    f = RationalField()
    val = f.div(f.from_int(num), f.from_int(den))
    primes = rational_prime_factors(val)
    assert all(all(p % d for d in range(2, p)) for p in primes)
    n, d = abs(int(val.numerator)), int(val.denominator)
    for target in (n, d):
        rest = target
        for p in primes:
            while rest and rest % p == 0:
                rest //= p
        assert rest in (0, 1)


def test_field_equality_and_caching():
    assert field_of_size(9) is field_of_size(9)
    assert field_of_size(9) == FiniteField(3, 2)
    assert field_of_size(3) != field_of_size(9)
    assert RationalField() == RationalField()
