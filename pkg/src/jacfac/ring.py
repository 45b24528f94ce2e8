"""Truncated power series and the parametrized singularity ring.

The ring of a unibranch germ is R = K[[x(z), y(z)]] inside O = K[[z]].
``valuation_basis`` finds, by subduction, monic series b_gamma in R whose
valuations minimally generate the value semigroup Gamma = v(R): whenever
two monomial products in the current basis share a valuation, their
difference either subducts to zero or contributes a new basis valuation.
``phi_element`` then realizes every gamma in Gamma as a deterministic
monic product phi_gamma of basis elements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dataclass_field
from math import gcd
from typing import Iterable, Mapping

from .fields import FiniteField, RationalField, rational_prime_factors
from .semigroup import Semigroup, semigroup_generate

INFINITY = float("inf")


class Series:
    """Sparse truncated series: coefficients {exponent: value}, exact up to
    and including order ``trunc``; higher terms are unknown, not zero."""

    __slots__ = ("K", "trunc", "coeffs")

    def __init__(self, K, trunc: int, coeffs: Mapping[int, object] | None = None):
        self.K = K
        self.trunc = trunc
        cs = {}
        if coeffs:
            for e, c in coeffs.items():
                if e <= trunc and not K.is_zero(c):
                    cs[e] = c
        self.coeffs = cs

    # -- constructors --------------------------------------------------------

    @staticmethod
    def monomial(K, trunc: int, exp: int, coeff=None) -> "Series":
        return Series(K, trunc, {exp: K.one if coeff is None else coeff})

    @staticmethod
    def from_int_poly(K, trunc: int, poly: Mapping[int, int]) -> "Series":
        return Series(K, trunc, {e: K.from_int(c) for e, c in poly.items()})

    # -- inspection ------------------------------------------------------------

    def valuation(self) -> int | float:
        return min(self.coeffs) if self.coeffs else INFINITY

    def leading_coeff(self):
        return self.coeffs[min(self.coeffs)]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, e: int):
        return self.coeffs.get(e, self.K.zero)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Series)
            and self.K == other.K
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.trunc, tuple(sorted(self.coeffs))))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = [f"{c}*z^{e}" for e, c in sorted(self.coeffs.items())]
        return " + ".join(parts) + f" + O(z^{self.trunc + 1})"

    # -- arithmetic -------------------------------------------------------------

    def add(self, other: "Series") -> "Series":
        K = self.K
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = K.add(out.get(e, K.zero), c)
            if K.is_zero(s):
                out.pop(e, None)
            else:
                out[e] = s
        res = Series(K, min(self.trunc, other.trunc))
        res.coeffs = {e: c for e, c in out.items() if e <= res.trunc}
        return res

    def neg(self) -> "Series":
        res = Series(self.K, self.trunc)
        res.coeffs = {e: self.K.neg(c) for e, c in self.coeffs.items()}
        return res

    def sub(self, other: "Series") -> "Series":
        return self.add(other.neg())

    def scale(self, c) -> "Series":
        K = self.K
        res = Series(K, self.trunc)
        if not K.is_zero(c):
            res.coeffs = {e: K.mul(c, v) for e, v in self.coeffs.items()}
        return res

    def shift(self, k: int) -> "Series":
        """Multiply by z^k."""
        res = Series(self.K, self.trunc)
        res.coeffs = {e + k: c for e, c in self.coeffs.items() if e + k <= self.trunc}
        return res

    def mul(self, other: "Series") -> "Series":
        K = self.K
        trunc = min(self.trunc, other.trunc)
        out: dict[int, object] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if e > trunc:
                    continue
                s = K.add(out.get(e, K.zero), K.mul(c1, c2))
                if K.is_zero(s):
                    out.pop(e, None)
                else:
                    out[e] = s
        res = Series(K, trunc)
        res.coeffs = out
        return res

    def monic(self) -> tuple["Series", object]:
        """Divide by the leading coefficient; returns (series, old leading coeff)."""
        lc = self.leading_coeff()
        return self.scale(self.K.inv(lc)), lc


def parse_poly_in_z(text: str) -> dict[int, int]:
    """Parse an integer polynomial in z: e.g. ``z^6``, ``z^9+z^13``, ``2z^4 - z^5 + 3``."""
    s = text.replace(" ", "").replace("**", "^").replace("*", "")
    if not s:
        raise ValueError("empty polynomial")
    out: dict[int, int] = {}
    pos = 0
    term_re = re.compile(r"([+-]?)(\d*)(z(?:\^(\d+))?)?")
    while pos < len(s):
        m = term_re.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        sign, num, zpart, power = m.groups()
        if not num and not zpart:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        coeff = int(num) if num else 1
        if sign == "-":
            coeff = -coeff
        exp = 0
        if zpart:
            exp = int(power) if power else 1
        out[exp] = out.get(exp, 0) + coeff
        pos = m.end()
    return {e: c for e, c in out.items() if c}


def parse_curve(text: str) -> tuple[dict[int, int], dict[int, int]]:
    """Parse ``x=<poly in z>, y=<poly in z>`` with integer coefficients."""
    m = re.match(r"\s*x\s*=\s*(.*?)\s*,\s*y\s*=\s*(.*?)\s*$", text)
    if not m:
        raise ValueError(
            f"curve must look like 'x=z^6, y=z^9+z^13', got {text!r}"
        )
    return parse_poly_in_z(m.group(1)), parse_poly_in_z(m.group(2))


@dataclass
class PlaneCurveRing:
    """The singularity ring with its monic valuation basis."""

    field: object
    trunc: int
    x_poly: dict[int, int]
    y_poly: dict[int, int]
    x_series: Series
    y_series: Series
    basis: dict[int, Series]
    semigroup: Semigroup
    excluded_primes: frozenset[int]
    _phi_cache: dict[int, Series] = dataclass_field(default_factory=dict, repr=False)
    _decomp_cache: dict[int, tuple[int, ...]] = dataclass_field(
        default_factory=dict, repr=False
    )

    def multiplicity(self) -> int:
        return self.semigroup.multiplicity()

    def phi(self, gamma: int) -> Series:
        return phi_element(self, gamma)


class SubductionError(ValueError):
    pass


def _decompose(gamma: int, vals: list[int], cache: dict | None = None) -> tuple[int, ...] | None:
    """Deterministic decomposition of gamma as a sum over vals (descending,
    largest-first with backtracking).  Returns the multiset or None."""
    if cache is not None and gamma in cache:
        return cache[gamma]
    result = None
    if gamma == 0:
        result = ()
    else:
        for v in vals:
            if v <= gamma:
                rest = _decompose(gamma - v, [w for w in vals if w <= v], None)
                if rest is not None:
                    result = (v,) + rest
                    break
    if cache is not None:
        cache[gamma] = result
    return result


def _product_for(ring_basis: dict[int, Series], decomp: Iterable[int], one: Series) -> Series:
    out = one
    for v in decomp:
        out = out.mul(ring_basis[v])
    return out


def valuation_basis(
    x_poly: Mapping[int, int],
    y_poly: Mapping[int, int],
    K,
    trunc: int | None = None,
    bound: int | None = None,
) -> PlaneCurveRing:
    """Build the ring and its monic valuation basis by subduction.

    ``trunc`` fixes the series truncation (default: 3*conductor, computed
    with a provisional truncation first).  ``bound`` caps how far the
    collision scan may go while the basis valuations are not yet coprime
    (default: v(x)*v(y)).
    """
    x0 = Series.from_int_poly(K, 10**9, dict(x_poly))
    y0 = Series.from_int_poly(K, 10**9, dict(y_poly))
    if x0.is_zero() or y0.is_zero() or x0.valuation() == 0 or y0.valuation() == 0:
        raise SubductionError("x and y must have positive valuation")
    vx, vy = int(x0.valuation()), int(y0.valuation())
    if bound is None:
        bound = vx * vy
    if trunc is None:
        provisional = 3 * vx * vy + 1
        ring = _subduct(x_poly, y_poly, K, provisional, bound)
        return _subduct(x_poly, y_poly, K, 3 * ring.semigroup.conductor, bound)
    return _subduct(x_poly, y_poly, K, trunc, bound)


def _subduct(x_poly, y_poly, K, trunc: int, bound: int) -> PlaneCurveRing:
    excluded: set[int] = set()
    rational = isinstance(K, RationalField)

    def normalize(s: Series) -> Series:
        monic, lc = s.monic()
        if rational:
            excluded.update(rational_prime_factors(lc))
        return monic

    x = Series.from_int_poly(K, trunc, dict(x_poly))
    y = Series.from_int_poly(K, trunc, dict(y_poly))
    one = Series.monomial(K, trunc, 0)
    basis: dict[int, Series] = {int(x.valuation()): normalize(x)}
    rem = _subduct_remainder(
        y, basis, sorted(basis, reverse=True), one, trunc, {}, normalize
    )
    if rem is not None:
        basis[int(rem.valuation())] = rem

    def semigroup_of(vals: list[int]) -> Semigroup | None:
        return semigroup_generate(vals) if gcd(*vals) == 1 else None

    while True:
        vals = sorted(basis, reverse=True)
        sg = semigroup_of(vals)
        scan_to = sg.conductor if sg else bound + 1
        decomp_cache: dict[int, tuple[int, ...] | None] = {}
        grew = False
        sigma = min(vals)
        while sigma < scan_to:
            # all multisets of basis valuations summing to sigma
            factorizations = _all_factorizations(sigma, vals)
            if len(factorizations) >= 2:
                ref = _product_for(basis, factorizations[0], one)
                for other in factorizations[1:]:
                    r = _product_for(basis, other, one).sub(ref)
                    new_elem = _subduct_remainder(
                        r, basis, vals, one, trunc, decomp_cache, normalize
                    )
                    if new_elem is not None:
                        v = int(new_elem.valuation())
                        basis[v] = new_elem
                        grew = True
                        break
            if grew:
                break
            sigma += 1
        if grew:
            continue
        if sg is None:
            raise SubductionError(
                f"valuations {sorted(basis)} never become coprime below {bound}: "
                f"the germ is not unibranch or is degenerate"
            )
        # minimalize the basis: keep only valuations that are minimal generators
        mingens = set(sg.minimal_generators())
        basis = {v: s for v, s in basis.items() if v in mingens}
        return PlaneCurveRing(
            field=K,
            trunc=trunc,
            x_poly=dict(x_poly),
            y_poly=dict(y_poly),
            x_series=x,
            y_series=y,
            basis=basis,
            semigroup=sg,
            excluded_primes=frozenset(excluded),
        )


def _all_factorizations(sigma: int, vals: list[int]) -> list[tuple[int, ...]]:
    """All multisets (descending tuples) of vals summing to sigma."""
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, allowed: list[int], acc: tuple[int, ...]) -> None:
        if remaining == 0:
            out.append(acc)
            return
        for idx, v in enumerate(allowed):
            if v <= remaining:
                rec(remaining - v, allowed[idx:], acc + (v,))

    rec(sigma, vals, ())
    return out


def _subduct_remainder(
    r: Series, basis, vals, one, trunc, decomp_cache, normalize
) -> Series | None:
    """Subduct r against canonical products; return a new monic basis element
    if r's valuation escapes the current valuation span, else None."""
    while not r.is_zero():
        v = int(r.valuation())
        decomp = _decompose(v, vals, decomp_cache)
        if decomp is None:
            return normalize(r)
        prod = _product_for(basis, decomp, one)
        r = r.sub(prod.scale(r.leading_coeff()))
    return None


def phi_element(ring: PlaneCurveRing, gamma: int) -> Series:
    """Deterministic monic ring element of valuation gamma (gamma in Gamma)."""
    if gamma in ring._phi_cache:
        return ring._phi_cache[gamma]
    if gamma not in ring.semigroup:
        raise ValueError(f"{gamma} is not in the value semigroup {ring.semigroup.generators}")
    vals = sorted(ring.basis, reverse=True)
    decomp = _decompose(gamma, vals, ring._decomp_cache)
    if decomp is None:
        # gamma >= conductor may need valuations not generated by minimal
        # generators alone below c; extend using any basis multiple
        raise ValueError(f"cannot decompose {gamma} over basis valuations {vals}")
    one = Series.monomial(ring.field, ring.trunc, 0)
    out = _product_for(ring.basis, decomp, one)
    ring._phi_cache[gamma] = out
    return out


def good_reduction(ring: PlaneCurveRing, p: int, ell: int = 1) -> bool:
    """True iff rebuilding the valuation basis over F_{p^ell} yields the
    same value semigroup (pivot invertibility is checked by the solver layer)."""
    if not isinstance(ring.field, RationalField):
        raise ValueError("good_reduction starts from a ring over the rationals")
    K = FiniteField(p, ell)
    try:
        modular = valuation_basis(ring.x_poly, ring.y_poly, K, trunc=ring.trunc)
    except (SubductionError, ValueError):
        return False
    return modular.semigroup.gaps == ring.semigroup.gaps
