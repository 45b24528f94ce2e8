"""Exact coefficient fields: the rationals and small finite fields.

A field object is a strategy operating on raw element values: rational
elements are ``gmpy2.mpq`` (or ``fractions.Fraction``) values, finite
field elements are integers in ``[0, q)`` encoding polynomials over F_p
in base p.  Prime-power fields are built from a fixed table of monic
irreducible polynomials and precompute full multiplication and inverse
tables; every order used by the point-counting schedule is <= 32, so the
tables are tiny.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

try:  # gmpy2 is faster; fractions is the stdlib fallback
    from gmpy2 import mpq as _rat
except ImportError:  # pragma: no cover
    from fractions import Fraction as _rat


class RationalField:
    """Exact rational arithmetic."""

    char = 0
    size: int | None = None

    def __init__(self) -> None:
        self.zero = _rat(0)
        self.one = _rat(1)

    def from_int(self, n: int):
        return _rat(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.one / a

    def div(self, a, b):
        return a * self.inv(b)

    def is_zero(self, a) -> bool:
        return a == 0

    def __repr__(self) -> str:
        return "Q"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("RationalField")


# Monic irreducible polynomials over F_p, ascending coefficients
# (constant first); the leading 1 is included.
_IRREDUCIBLE: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),  # x^2 + x + 1
    (2, 3): (1, 1, 0, 1),  # x^3 + x + 1
    (2, 4): (1, 1, 0, 0, 1),  # x^4 + x + 1
    (2, 5): (1, 0, 1, 0, 0, 1),  # x^5 + x^2 + 1
    (3, 2): (2, 2, 1),  # x^2 + 2x + 2
    (3, 3): (1, 2, 0, 1),  # x^3 + 2x + 1
    (5, 2): (2, 4, 1),  # x^2 + 4x + 2
}


class FiniteField:
    """F_{p^l} with elements encoded as integers in [0, p^l)."""

    def __init__(self, p: int, ell: int = 1) -> None:
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.char = p
        self.ell = ell
        self.size = p**ell
        self.zero = 0
        self.one = 1
        if ell == 1:
            self._mul_table = None
            self._inv_table = None
        else:
            if (p, ell) not in _IRREDUCIBLE:
                raise ValueError(f"no irreducible polynomial on file for p^l = {p}^{ell}")
            modulus = _IRREDUCIBLE[(p, ell)]
            self._mul_table = self._build_mul_table(modulus)
            self._inv_table = self._build_inv_table()

    # -- encoding helpers ---------------------------------------------------

    def _digits(self, a: int) -> list[int]:
        p = self.char
        out = []
        for _ in range(self.ell):
            out.append(a % p)
            a //= p
        return out

    def _undigits(self, ds: list[int]) -> int:
        p = self.char
        out = 0
        for d in reversed(ds):
            out = out * p + d
        return out

    def _build_mul_table(self, modulus: tuple[int, ...]) -> list[list[int]]:
        p, ell, q = self.char, self.ell, self.size
        table = [[0] * q for _ in range(q)]
        for a in range(q):
            da = self._digits(a)
            for b in range(a, q):
                db = self._digits(b)
                prod = [0] * (2 * ell - 1)
                for i, ca in enumerate(da):
                    if ca:
                        for j, cb in enumerate(db):
                            prod[i + j] = (prod[i + j] + ca * cb) % p
                # reduce mod the irreducible polynomial
                for k in range(len(prod) - 1, ell - 1, -1):
                    c = prod[k]
                    if c:
                        prod[k] = 0
                        for j in range(ell):
                            prod[k - ell + j] = (prod[k - ell + j] - c * modulus[j]) % p
                v = self._undigits(prod[:ell])
                table[a][b] = v
                table[b][a] = v
        return table

    def _build_inv_table(self) -> list[int]:
        q = self.size
        inv = [0] * q
        assert self._mul_table is not None
        for a in range(1, q):
            for b in range(1, q):
                if self._mul_table[a][b] == 1:
                    inv[a] = b
                    break
            else:
                raise AssertionError(f"modulus not irreducible: {a} has no inverse")
        return inv

    # -- field operations ----------------------------------------------------

    def from_int(self, n: int) -> int:
        return n % self.char

    def add(self, a: int, b: int) -> int:
        p = self.char
        if self.ell == 1:
            return (a + b) % p
        out, mult = 0, 1
        for _ in range(self.ell):
            out += ((a + b) % p) * mult
            a //= p
            b //= p
            mult *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def neg(self, a: int) -> int:
        p = self.char
        if self.ell == 1:
            return (-a) % p
        out, mult = 0, 1
        for _ in range(self.ell):
            out += ((-a) % p) * mult
            a //= p
            mult *= p
        return out

    def mul(self, a: int, b: int) -> int:
        if self.ell == 1:
            return (a * b) % self.char
        return self._mul_table[a][b]  # type: ignore[index]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.ell == 1:
            return pow(a, self.char - 2, self.char)
        return self._inv_table[a]  # type: ignore[index]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def is_zero(self, a: int) -> bool:
        return a == 0

    def elements(self) -> Iterator[int]:
        return iter(range(self.size))

    def __repr__(self) -> str:
        return f"F{self.size}" if self.ell > 1 else f"F{self.char}"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteField)
            and other.char == self.char
            and other.ell == self.ell
        )

    def __hash__(self) -> int:
        return hash(("FiniteField", self.char, self.ell))


@lru_cache(maxsize=None)
def field_of_size(q: int) -> FiniteField:
    """The finite field with q elements (q a prime power on file)."""
    for p in range(2, q + 1):
        if q % p == 0:
            ell = 0
            rest = q
            while rest % p == 0:
                rest //= p
                ell += 1
            if rest != 1:
                raise ValueError(f"{q} is not a prime power")
            return FiniteField(p, ell)
    raise ValueError(f"{q} is not a prime power")


def rational_prime_factors(a) -> set[int]:
    """Prime factors of numerator and denominator of a rational value."""
    out: set[int] = set()
    num = getattr(a, "numerator", None)
    den = getattr(a, "denominator", None)
    if num is None or den is None:
        raise TypeError(f"not a rational value: {a!r}")
    for n in (abs(int(num)), abs(int(den))):
        d = 2
        while d * d <= n:
            if n % d == 0:
                out.add(d)
                while n % d == 0:
                    n //= d
            d += 1
        if n > 1:
            out.add(n)
    return out
