"""Topological data of unibranch plane-curve germs and their value semigroups.

A unibranch plane-curve germ is encoded (equivalently) by

* its Newton pairs ``(r_i, s_i)``, coprime within each pair,
* its cable parameters ``(a_i, r_i)`` presenting the link of the
  singularity as an iterated torus knot, or
* its characteristic exponents ``(e; beta_1 < ... < beta_ell)``, where
  ``e`` is the multiplicity,

and each encoding determines the value semigroup Gamma of the germ.  This
module converts between all of these and builds the semigroup itself:
membership table, gap set G, genus ``delta = |G|`` and conductor ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, prod
from typing import Iterable, Sequence


@dataclass(frozen=True)
class NewtonPairs:
    """Newton pairs ``(r_1, s_1), ..., (r_ell, s_ell)`` of a unibranch germ.

    The germ is ``y = x^(s1/r1) (c_1 + x^(s2/(r1 r2)) (c_2 + ...))``; the
    parametrization ``x = z^(r1...rl)``, ``y = c_1 z^(s1 r2...rl) + ...``
    realizes it.  Either ordering of the first pair is accepted: swapping
    ``(r_1, s_1)`` exchanges the roles of x and y and leaves the link and
    the semigroup unchanged.
    """

    r: tuple[int, ...]
    s: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        object.__setattr__(self, "s", tuple(int(v) for v in self.s))
        if not self.r or len(self.r) != len(self.s):
            raise ValueError("r and s must be nonempty sequences of equal length")
        for i, (ri, si) in enumerate(zip(self.r, self.s), start=1):
            if ri <= 0 or si <= 0:
                raise ValueError(f"pair {i}: entries must be positive, got ({ri}, {si})")
            if gcd(ri, si) != 1:
                raise ValueError(f"pair {i}: gcd({ri}, {si}) = {gcd(ri, si)} != 1")

    @property
    def length(self) -> int:
        return len(self.r)

    def x_valuation(self) -> int:
        """Valuation of x, i.e. r_1 r_2 ... r_ell."""
        return prod(self.r)

    def y_valuation(self) -> int:
        """Valuation of y, i.e. s_1 r_2 ... r_ell."""
        return self.s[0] * prod(self.r[1:])

    def multiplicity(self) -> int:
        """Smallest nonzero valuation of the germ."""
        return min(self.x_valuation(), self.y_valuation())

    def swapped(self) -> "NewtonPairs":
        """Exchange x and y by swapping the first pair; same link, same semigroup."""
        return NewtonPairs((self.s[0],) + self.r[1:], (self.r[0],) + self.s[1:])


@dataclass(frozen=True)
class CableParams:
    """Cable parameters: the link is Cab(a_ell, r_ell)...Cab(a_2, r_2) T(a_1, r_1)."""

    a: tuple[int, ...]
    r: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        if not self.a or len(self.a) != len(self.r):
            raise ValueError("a and r must be nonempty sequences of equal length")

    def pairs(self) -> tuple[tuple[int, int], ...]:
        """The pairs (a_i, r_i), innermost (torus) pair first, with the
        torus pair printed largest-first (T(a,b) = T(b,a))."""
        first = (max(self.a[0], self.r[0]), min(self.a[0], self.r[0]))
        return (first,) + tuple(zip(self.a[1:], self.r[1:]))

    def link_str(self) -> str:
        ps = self.pairs()
        cables = "".join(f"Cab({a},{r})" for a, r in reversed(ps[1:]))
        return f"{cables}T({ps[0][0]},{ps[0][1]})"


def newton_to_cable(pairs: NewtonPairs) -> CableParams:
    """Cable parameters a_1 = s_1, a_i = a_{i-1} r_{i-1} r_i + s_i."""
    a = [pairs.s[0]]
    for i in range(1, pairs.length):
        a.append(a[-1] * pairs.r[i - 1] * pairs.r[i] + pairs.s[i])
    return CableParams(tuple(a), pairs.r)


def cable_to_newton(cable: CableParams) -> NewtonPairs:
    """Inverse of :func:`newton_to_cable`."""
    s = [cable.a[0]]
    for i in range(1, len(cable.a)):
        s.append(cable.a[i] - cable.a[i - 1] * cable.r[i - 1] * cable.r[i])
    return NewtonPairs(cable.r, tuple(s))


def exponents_to_newton(char_exponents: Sequence[int]) -> NewtonPairs:
    """Newton pairs from characteristic exponents ``(e; beta_1, ..., beta_ell)``.

    The multiplicity ``e`` comes first and ``e < beta_1 < ... < beta_ell``;
    the gcd chain ``e_0 = e``, ``e_i = gcd(e_{i-1}, beta_i)`` must drop at
    every step and terminate at 1.  Then ``r_i = e_{i-1}/e_i``,
    ``s_1 = beta_1/e_1`` and ``s_i = (beta_i - beta_{i-1})/e_i``.
    """
    exps = [int(v) for v in char_exponents]
    if len(exps) < 2:
        raise ValueError("need the multiplicity and at least one exponent")
    e, betas = exps[0], exps[1:]
    if e < 2:
        raise ValueError(f"multiplicity must be >= 2, got {e}")
    if any(b <= a for a, b in zip(betas, betas[1:])):
        raise ValueError(f"exponents must be strictly increasing, got {betas}")
    if betas[0] <= e:
        raise ValueError(
            f"the multiplicity must come first: expected beta_1 > e, got "
            f"(e; beta) = ({e}; {betas}); list the smaller of the two "
            f"leading valuations as e"
        )
    r: list[int] = []
    s: list[int] = []
    prev_e, prev_beta = e, 0
    for i, b in enumerate(betas, start=1):
        cur_e = gcd(prev_e, b)
        if cur_e == prev_e:
            raise ValueError(
                f"beta_{i} = {b} is divisible by gcd(e, beta_1..beta_{i - 1}) "
                f"= {prev_e}; not a characteristic exponent"
            )
        r.append(prev_e // cur_e)
        s.append((b - prev_beta) // cur_e)
        prev_e, prev_beta = cur_e, b
    if prev_e != 1:
        raise ValueError(f"gcd chain terminates at {prev_e}, not 1: the germ is not unibranch")
    return NewtonPairs(tuple(r), tuple(s))


def newton_to_exponents(pairs: NewtonPairs) -> tuple[int, ...]:
    """Characteristic exponents ``(e; beta_1, ..., beta_ell)`` of the germ.

    Normalizes so that the multiplicity comes first (swaps the first pair
    when ``s_1 < r_1``).
    """
    if pairs.s[0] < pairs.r[0]:
        pairs = pairs.swapped()
    betas: list[int] = []
    beta = 0
    for i in range(pairs.length):
        beta += pairs.s[i] * prod(pairs.r[i + 1 :])
        betas.append(beta)
    return (prod(pairs.r), *betas)


@dataclass(frozen=True)
class Semigroup:
    """A numerical semigroup: membership on [0, c], gaps, delta = |gaps|, conductor c.

    ``members[n]`` answers membership for 0 <= n <= c; every integer >= c
    is a member.  Use ``n in sg`` for arbitrary n.
    """

    generators: tuple[int, ...]
    members: tuple[bool, ...]
    gaps: tuple[int, ...]
    delta: int
    conductor: int

    def __contains__(self, n: int) -> bool:
        if n >= self.conductor:
            return True
        return n >= 0 and self.members[n]

    def multiplicity(self) -> int:
        return self.generators[0]

    def minimal_generators(self) -> tuple[int, ...]:
        """Elements of the semigroup not expressible as a sum of two nonzero elements."""
        out = []
        for n in range(1, self.conductor + self.multiplicity()):
            if n in self and not any(
                m in self and (n - m) in self for m in range(1, n)
            ):
                out.append(n)
        return tuple(out)


def semigroup_generate(generators: Iterable[int]) -> Semigroup:
    """Numerical semigroup generated by ``generators`` (gcd must be 1)."""
    gens = sorted({int(g) for g in generators})
    if not gens or gens[0] <= 0:
        raise ValueError(f"generators must be positive integers, got {gens}")
    if gcd(*gens) != 1:
        raise ValueError(
            f"gcd of generators is {gcd(*gens)} != 1; the complement would be infinite"
        )
    # Reachability up to a bound past the Frobenius number: F(S) <= F(<a,b>)
    # < a*b for any coprime pair a, b in S, falling back to g_min*g_max.
    bound = gens[0] * gens[-1]
    for i in range(len(gens)):
        if gens[i] * gens[i] >= bound:
            break
        for j in range(i + 1, len(gens)):
            if gens[i] * gens[j] >= bound:
                break
            if gcd(gens[i], gens[j]) == 1:
                bound = gens[i] * gens[j]
    bound += 1
    reach = bytearray(bound + 1)
    reach[0] = 1
    for g in gens:
        if reach[g]:
            continue  # already generated by the smaller generators
        for i in range(g, bound + 1):
            if reach[i - g]:
                reach[i] = 1
    frobenius = -1
    for i in range(bound, -1, -1):
        if not reach[i]:
            frobenius = i
            break
    c = frobenius + 1
    gaps = tuple(i for i in range(c) if not reach[i])
    return Semigroup(
        generators=tuple(gens),
        members=tuple(bool(b) for b in reach[: c + 1]),
        gaps=gaps,
        delta=len(gaps),
        conductor=c,
    )


def semigroup_from_newton(pairs: NewtonPairs) -> Semigroup:
    """Value semigroup of the germ: generated by r_1...r_ell and a_i r_{i+1}...r_ell."""
    cable = newton_to_cable(pairs)
    gens = [prod(pairs.r)]
    for i, a in enumerate(cable.a):
        gens.append(a * prod(pairs.r[i + 1 :]))
    return semigroup_generate(gens)


def generators_to_exponents(sg: Semigroup) -> tuple[int, ...]:
    """Characteristic exponents of the plane-curve germ with value semigroup ``sg``.

    The minimal generators ``v_0 < v_1 < ... < v_ell`` of a plane-curve
    semigroup satisfy ``v_{i+1} = (e_{i-1}/e_i) v_i + beta_{i+1} - beta_i``
    with ``v_0 = e``, ``v_1 = beta_1`` and ``e_i = gcd(e, beta_1..beta_i)``;
    invert that recursion and validate by regenerating the semigroup.
    Raises ``ValueError`` if ``sg`` is not a plane-curve semigroup.
    """
    mingens = sg.minimal_generators()
    if len(mingens) == 1:  # the full integer semigroup: a smooth germ
        raise ValueError("the semigroup of a smooth germ has no characteristic exponents")
    exps = [mingens[0], mingens[1]]
    e_chain = [mingens[0], gcd(mingens[0], mingens[1])]
    v = mingens[1]
    for v_next in mingens[2:]:
        r_i = e_chain[-2] // e_chain[-1]
        beta_next = v_next - r_i * v + exps[-1]
        exps.append(beta_next)
        e_chain.append(gcd(e_chain[-1], beta_next))
        v = v_next
    try:
        pairs = exponents_to_newton(exps)
    except ValueError as err:
        raise ValueError(f"{tuple(mingens)} is not a plane-curve semigroup: {err}") from err
    if semigroup_from_newton(pairs).gaps != sg.gaps:
        raise ValueError(f"{tuple(mingens)} is not a plane-curve semigroup")
    return tuple(exps)


def a_degree_bound(pairs: NewtonPairs) -> int:
    """Maximal flag length: multiplicity - 1 (equals s_1 r_2...r_ell - 1 when r_1 > s_1)."""
    return pairs.multiplicity() - 1
