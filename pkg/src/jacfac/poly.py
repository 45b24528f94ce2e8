"""Sparse multivariate polynomials over an exact coefficient field.

A monomial is a sorted tuple of variable indices with multiplicity
(``()`` is the constant monomial, ``(0, 0, 3)`` is ``v0^2 * v3``); a
polynomial is a dict mapping monomials to nonzero field elements.  All
operations return fresh dicts; polynomials are never mutated in place.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

Mono = tuple[int, ...]
Poly = dict[Mono, object]


class PolyRing:
    """Polynomial arithmetic over the field strategy K."""

    def __init__(self, K) -> None:
        self.K = K

    # -- constructors ---------------------------------------------------------

    def zero(self) -> Poly:
        return {}

    def one(self) -> Poly:
        return {(): self.K.one}

    def const(self, c) -> Poly:
        return {} if self.K.is_zero(c) else {(): c}

    def from_int(self, n: int) -> Poly:
        return self.const(self.K.from_int(n))

    def var(self, i: int) -> Poly:
        return {(i,): self.K.one}

    # -- arithmetic -------------------------------------------------------------

    def add(self, p: Poly, q: Poly) -> Poly:
        K = self.K
        out = dict(p)
        for m, c in q.items():
            s = K.add(out.get(m, K.zero), c)
            if K.is_zero(s):
                out.pop(m, None)
            else:
                out[m] = s
        return out

    def neg(self, p: Poly) -> Poly:
        K = self.K
        return {m: K.neg(c) for m, c in p.items()}

    def sub(self, p: Poly, q: Poly) -> Poly:
        return self.add(p, self.neg(q))

    def scale(self, p: Poly, c) -> Poly:
        K = self.K
        if K.is_zero(c):
            return {}
        return {m: K.mul(c, v) for m, v in p.items()}

    def mul(self, p: Poly, q: Poly) -> Poly:
        K = self.K
        out: Poly = {}
        for m1, c1 in p.items():
            for m2, c2 in q.items():
                m = tuple(sorted(m1 + m2))
                s = K.add(out.get(m, K.zero), K.mul(c1, c2))
                if K.is_zero(s):
                    out.pop(m, None)
                else:
                    out[m] = s
        return out

    def pow(self, p: Poly, n: int) -> Poly:
        out = self.one()
        for _ in range(n):
            out = self.mul(out, p)
        return out

    # -- inspection ---------------------------------------------------------------

    def is_zero(self, p: Poly) -> bool:
        return not p

    def is_constant(self, p: Poly) -> bool:
        return not p or (len(p) == 1 and () in p)

    def const_coeff(self, p: Poly):
        return p.get((), self.K.zero)

    def vars_used(self, p: Poly) -> set[int]:
        out: set[int] = set()
        for m in p:
            out.update(m)
        return out

    def degree(self, p: Poly) -> int:
        return max((len(m) for m in p), default=0)

    # -- substitution and evaluation -------------------------------------------

    def substitute(self, p: Poly, subs: Mapping[int, Poly]) -> Poly:
        """Simultaneously replace variables by polynomials.  The
        replacement polynomials must not themselves contain substituted
        variables (callers keep the substitution map closed)."""
        if not subs:
            return dict(p)
        K = self.K
        out: Poly = {}
        pow_cache: dict[tuple[int, int], Poly] = {}
        for m, c in p.items():
            kept: list[int] = []
            hit: dict[int, int] = {}
            for v in m:
                if v in subs:
                    hit[v] = hit.get(v, 0) + 1
                else:
                    kept.append(v)
            if not hit:
                s = K.add(out.get(m, K.zero), c)
                if K.is_zero(s):
                    out.pop(m, None)
                else:
                    out[m] = s
                continue
            term: Poly = {tuple(kept): c}
            for v, d in hit.items():
                key = (v, d)
                if key not in pow_cache:
                    pow_cache[key] = self.pow(subs[v], d)
                term = self.mul(term, pow_cache[key])
            for m2, c2 in term.items():
                s = K.add(out.get(m2, K.zero), c2)
                if K.is_zero(s):
                    out.pop(m2, None)
                else:
                    out[m2] = s
        return out

    def evaluate(self, p: Poly, assign: Mapping[int, object]):
        """Fully evaluate; every variable of p must be assigned."""
        K = self.K
        total = K.zero
        for m, c in p.items():
            term = c
            for v in m:
                term = K.mul(term, assign[v])
            total = K.add(total, term)
        return total

    def map_coefficients(self, p: Poly, convert: Callable, target: "PolyRing") -> Poly:
        """Transport p to another coefficient field via ``convert``."""
        out: Poly = {}
        for m, c in p.items():
            c2 = convert(c)
            if not target.K.is_zero(c2):
                out[m] = c2
        return out

    def to_string(self, p: Poly, names: Callable[[int], str] = lambda i: f"v{i}") -> str:
        if not p:
            return "0"
        parts = []
        for m, c in sorted(p.items(), key=lambda kv: (len(kv[0]), kv[0])):
            mono = "*".join(names(i) for i in m)
            parts.append(f"{c}" if not mono else f"{c}*{mono}")
        return " + ".join(parts)
