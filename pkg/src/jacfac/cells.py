"""Flagged-cell analysis: λ-parametrized module frames, syzygies, the
standardized reduction, and triangular elimination.

For a flag ``D_0 ⊂ ... ⊂ D_m`` of D-sets over the value semigroup of a
unibranch plane curve ring R, the locus of flags of R-submodules
``M_0 ⊂ ... ⊂ M_m ⊂ O`` with prescribed valuation sets ``Δ_i`` is cut
out, inside an affine space of normalized λ-coordinates, by requiring
that every inter-generator syzygy at every level and every containment
syzygy between consecutive levels reduce to zero.  Most of the
resulting relations are triangular — a difference of two λ's plus a
polynomial in variables of strictly smaller offset — and eliminating
them in ascending offset order leaves either nothing (an affine cell),
a visibly inconsistent constant (an empty cell), or a small residual
polynomial system that is handed to the point-counting layer.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .fields import RationalField, rational_prime_factors
from .modules import (
    DFlag,
    GammaModule,
    enumerate_standard_modules,
    module_from_dset,
    primitive_dset,
)
from .poly import Poly, PolyRing
from .ring import PlaneCurveRing, Series, valuation_basis
from .semigroup import Semigroup, semigroup_generate


class DegreeBoundExceeded(ValueError):
    """A required syzygy degree lies beyond the series truncation."""


class ResidualTooLarge(ValueError):
    """A residual system involves more variables than the configured cap."""


#: A series whose coefficients are polynomials in the λ-variables,
#: stored sparsely as {exponent: polynomial}; exponents >= the working
#: limit are never tracked (they can never feed back into a gap
#: position, which is where relations are read off).
LSeries = dict[int, Poly]


@dataclass(frozen=True)
class LambdaVar:
    """One λ-coordinate: the coefficient of ``z^exponent`` in the
    template owned by ``owner`` (a frame generator ``("m", class)`` or a
    flag generator ``("h", level)``)."""

    owner: tuple[str, int]
    exponent: int
    offset: int  # exponent - leading exponent of the owner
    rank: int  # owner order: m_j -> j, h_i -> e - 1 + i
    name: str


class VarSpace:
    """Registry of λ-variables; polynomial variable ids index into it."""

    def __init__(self) -> None:
        self.vars: list[LambdaVar] = []
        self.offset: list[int] = []
        self.rank: list[int] = []
        self.name: list[str] = []

    def add(self, owner: tuple[str, int], exponent: int, lead: int, rank: int) -> int:
        vid = len(self.vars)
        lv = LambdaVar(
            owner=owner,
            exponent=exponent,
            offset=exponent - lead,
            rank=rank,
            name=f"{owner[0]}{owner[1]}[{exponent}]",
        )
        self.vars.append(lv)
        self.offset.append(lv.offset)
        self.rank.append(lv.rank)
        self.name.append(lv.name)
        return vid

    def __len__(self) -> int:
        return len(self.vars)


class SolveContext:
    """Shared immutable data for solving the cells of one curve."""

    def __init__(self, ring: PlaneCurveRing, bound_factor: int = 1) -> None:
        self.ring = ring
        self.sg = ring.semigroup
        self.e = self.sg.multiplicity()
        self.R = PolyRing(ring.field)
        self.bound_factor = bound_factor
        self.lim = bound_factor * self.sg.conductor
        if self.lim > ring.trunc:
            raise DegreeBoundExceeded(
                f"degree bound exceeded: the solver needs series exact up to "
                f"order {self.lim} but the ring is truncated at {ring.trunc}"
            )
        self.xhat = ring.basis[self.e]  # monic element of valuation e
        self.vs = VarSpace()
        self.record_primes = isinstance(ring.field, RationalField)


class Frame:
    """One flag level: a generator template per residue class mod e,
    with lazily built reduction elements x^k * generator."""

    __slots__ = ("ctx", "module", "leads", "gens", "_reducers", "_chains")

    def __init__(
        self,
        ctx: SolveContext,
        module: GammaModule,
        leads: tuple[int, ...],
        gens: tuple[LSeries, ...],
    ) -> None:
        self.ctx = ctx
        self.module = module
        self.leads = leads
        self.gens = gens
        self._reducers: dict[int, LSeries] = {}
        self._chains: dict[int, list[LSeries]] = {}

    def reducer(self, p: int) -> LSeries:
        """The monic element of the framed module with valuation p."""
        r = self._reducers.get(p)
        if r is None:
            j = p % self.ctx.e
            k = (p - self.leads[j]) // self.ctx.e
            chain = self._chains.get(j)
            if chain is None:
                chain = [self.gens[j]]
                self._chains[j] = chain
            while len(chain) <= k:
                chain.append(_mul_series(self.ctx, self.ctx.xhat, chain[-1]))
            r = chain[k]
            self._reducers[p] = r
        return r


# ---------------------------------------------------------------------------
# λ-series arithmetic
# ---------------------------------------------------------------------------


def _mul_series(ctx: SolveContext, s: Series, t: LSeries) -> LSeries:
    """Product of a plain series with a λ-series, truncated below ctx.lim."""
    R = ctx.R
    lim = ctx.lim
    out: LSeries = {}
    for p, c in s.coeffs.items():
        if p >= lim:
            continue
        for k, poly in t.items():
            q = p + k
            if q >= lim:
                continue
            term = R.scale(poly, c)
            if not term:
                continue
            cur = out.get(q)
            if cur is None:
                out[q] = term
            else:
                val = R.add(cur, term)
                if val:
                    out[q] = val
                else:
                    del out[q]
    return out


def _ls_sub(R: PolyRing, a: LSeries, b: LSeries) -> LSeries:
    out = dict(a)
    for k, poly in b.items():
        cur = out.get(k)
        val = R.sub(cur, poly) if cur is not None else R.neg(poly)
        if val:
            out[k] = val
        elif cur is not None:
            del out[k]
    return out


def _reduce(ctx: SolveContext, frame: Frame, y: LSeries) -> LSeries:
    """Standardized reduction: eliminate every coefficient sitting at an
    exponent of Δ with the frame's monic element of that valuation, in
    ascending order.  The result is supported on the gaps of Δ.  It is a
    linear idempotent projection in the λ-coefficients.

    Elimination moves mass strictly upward (reducer tails lie strictly
    above their valuation), so entries at or above the conductor — where
    every exponent belongs to Δ and every gap lies below — can never
    influence a gap coefficient and are dropped outright."""
    cond = ctx.sg.conductor
    out = {p: c for p, c in y.items() if p < cond}
    mod = frame.module
    R = ctx.R
    for p in range(cond):
        c = out.get(p)
        if c is None:
            continue
        if not c:
            del out[p]
            continue
        if p in mod:
            del out[p]
            red = frame.reducer(p)
            for k, rc in red.items():
                if k == p or k >= cond:
                    continue
                term = R.mul(c, rc)
                if not term:
                    continue
                cur = out.get(k)
                val = R.sub(cur, term) if cur is not None else R.neg(term)
                if val:
                    out[k] = val
                elif cur is not None:
                    del out[k]
    return out


# ---------------------------------------------------------------------------
# Frames and templates
# ---------------------------------------------------------------------------


def _template(
    ctx: SolveContext,
    owner: tuple[str, int],
    rank: int,
    lead: int,
    support: Iterable[int],
) -> LSeries:
    """Monic template z^lead + sum of fresh λ-variables over the support."""
    R = ctx.R
    out: LSeries = {lead: R.one()}
    for k in support:
        vid = ctx.vs.add(owner, k, lead, rank)
        out[k] = R.var(vid)
    return out


def _base_frame(ctx: SolveContext, module: GammaModule) -> tuple[Frame, int]:
    """Frame for the base level: one template m_j per residue class,
    normalized to lead at the smallest element of Δ in its class, with a
    λ-variable at every gap of Δ above the lead."""
    apery = module.apery()
    gaps = module.delta_gaps()
    before = len(ctx.vs)
    gens = []
    for j in range(ctx.e):
        a = apery[j]
        gens.append(_template(ctx, ("m", j), j, a, (k for k in gaps if k > a)))
    frame = Frame(ctx, module, tuple(apery), tuple(gens))
    return frame, len(ctx.vs) - before


def _extend_frame(
    ctx: SolveContext, prev: Frame, new_module: GammaModule, g: int, level: int
) -> tuple[Frame, int]:
    """Adjoin the level template h = z^g + Σ λ z^k (k over the gaps of
    the new Δ above g); it replaces the previous generator in the class
    of g, whose lead always sits exactly one multiplicity above g."""
    cls = g % ctx.e
    if cls == 0:
        raise ValueError(f"{g} is a multiple of the multiplicity, not a gap")
    if prev.leads[cls] != g + ctx.e:
        raise AssertionError(
            f"replaced generator leads at {prev.leads[cls]}, expected {g + ctx.e}"
        )
    before = len(ctx.vs)
    sup = (k for k in new_module.delta_gaps() if k > g)
    h = _template(ctx, ("h", level), ctx.e - 1 + level, g, sup)
    gens = list(prev.gens)
    gens[cls] = h
    leads = list(prev.leads)
    leads[cls] = g
    frame = Frame(ctx, new_module, tuple(leads), tuple(gens))
    return frame, len(ctx.vs) - before


@dataclass
class ModuleFrame:
    """Public view of a base-level frame: the Apéry normal form of the
    module's generator templates, plus the λ-variable registry."""

    ring: PlaneCurveRing
    module: GammaModule
    apery: tuple[int, ...]
    generators: tuple[LSeries, ...]
    vars: VarSpace
    poly_ring: PolyRing
    ctx: SolveContext
    frame: Frame

    @property
    def var_count(self) -> int:
        return len(self.vars)


def build_frame(
    module: GammaModule,
    ring: PlaneCurveRing,
    *,
    bound_factor: int = 1,
    ctx: SolveContext | None = None,
) -> ModuleFrame:
    _check_same_curve(module.sg, ring)
    if ctx is None:
        ctx = SolveContext(ring, bound_factor)
    frame, _ = _base_frame(ctx, module)
    return ModuleFrame(
        ring=ring,
        module=module,
        apery=frame.leads,
        generators=frame.gens,
        vars=ctx.vs,
        poly_ring=ctx.R,
        ctx=ctx,
        frame=frame,
    )


def reduce_dagger(y: LSeries, frame: ModuleFrame) -> LSeries:
    """Reduce a λ-series against a base frame; the result is supported
    on the gaps of the framed module."""
    return _reduce(frame.ctx, frame.frame, y)


def _check_same_curve(sg: Semigroup, ring: PlaneCurveRing) -> None:
    if sg.gaps != ring.semigroup.gaps:
        raise ValueError(
            f"module semigroup {sg.generators} does not match the "
            f"ring's value semigroup {ring.semigroup.generators}"
        )


# ---------------------------------------------------------------------------
# Syzygies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Syzygy:
    """A pair of equal-valuation legs whose difference must reduce to
    zero.  ``kind`` is "pair" (φ_{γ1}·gen_a − φ_{γ2}·gen_b, the minimal
    common valuation σ of the two leads; ring-relation syzygies arise
    here as the pairs whose φ leg is a composite basis element) or
    "containment" (previous-level generator minus x·h)."""

    kind: str
    level: int
    classes: tuple[int, int]
    sigma: int
    legs: tuple[int, int]  # multiplier valuations (γ1, γ2)


def _minimal_sigmas(sg: Semigroup, w1: int, w2: int, bound: int) -> list[int]:
    """Minimal common valuations: σ with σ−w1, σ−w2 both in Γ and no
    σ−γ (γ in Γ, γ>0) sharing the property."""

    def in_s(s: int) -> bool:
        return (s - w1) in sg and (s - w2) in sg

    out = []
    for s in range(max(w1, w2), bound):
        if in_s(s) and not any(in_s(s - g) for g in sg.generators):
            out.append(s)
    return out


def _pair_syzygies(ctx: SolveContext, frame: Frame, level: int) -> list[Syzygy]:
    # Syzygies with σ >= lim reduce to zero identically (their support
    # sits at or above σ, past every tracked gap), so lim bounds the
    # enumeration; raising bound_factor widens it for stability checks.
    bound = ctx.lim
    out: list[Syzygy] = []
    for a in range(ctx.e):
        for b in range(a + 1, ctx.e):
            wa, wb = frame.leads[a], frame.leads[b]
            for s in _minimal_sigmas(ctx.sg, wa, wb, bound):
                out.append(Syzygy("pair", level, (a, b), s, (s - wa, s - wb)))
    return out


def syzygy_generators(frame: ModuleFrame) -> list[Syzygy]:
    """Minimal inter-generator syzygies of a base frame with common
    valuation below the working limit.  Syzygies at or beyond the limit
    reduce to zero identically (their support lies above every gap) and
    are omitted; ring relations appear here as the pairs whose
    multiplier leg is a composite basis element."""
    return _pair_syzygies(frame.ctx, frame.frame, 0)


def _syzygy_element(ctx: SolveContext, frame: Frame, syz: Syzygy) -> LSeries | None:
    if syz.sigma >= ctx.lim:
        # Supported above every tracked gap: reduces to zero identically.
        return None
    a, b = syz.classes
    la = _mul_series(ctx, ctx.ring.phi(syz.legs[0]), frame.gens[a])
    lb = _mul_series(ctx, ctx.ring.phi(syz.legs[1]), frame.gens[b])
    return _ls_sub(ctx.R, la, lb)


# ---------------------------------------------------------------------------
# Relations and elimination
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Relation:
    """One polynomial that must vanish, tagged with its provenance."""

    poly: Poly
    source: str


def _relations_of(
    ctx: SolveContext, frame: Frame, element: LSeries, source: str
) -> list[Relation]:
    reduced = _reduce(ctx, frame, element)
    return [Relation(p, f"{source}@{k}") for k, p in sorted(reduced.items()) if p]


def _level_relations(ctx: SolveContext, frame: Frame, level: int) -> list[Relation]:
    rels: list[Relation] = []
    for syz in _pair_syzygies(ctx, frame, level):
        el = _syzygy_element(ctx, frame, syz)
        if el is None:
            continue
        src = f"pair L{level} ({syz.classes[0]},{syz.classes[1]}) σ={syz.sigma}"
        rels.extend(_relations_of(ctx, frame, el, src))
    return rels


def _containment_relations(
    ctx: SolveContext, prev: Frame, frame: Frame, g: int, level: int
) -> list[Relation]:
    """The previous level's generator in the class of g must lie in the
    new module: reduce F = m_cls − x·h against the new frame."""
    cls = g % ctx.e
    F = _ls_sub(
        ctx.R, prev.gens[cls], _mul_series(ctx, ctx.xhat, frame.gens[cls])
    )
    return _relations_of(ctx, frame, F, f"containment L{level} g={g}")


def _mono_strip(m: tuple[int, ...], v: int) -> tuple[int, ...]:
    out = list(m)
    out.remove(v)
    return tuple(out)


def _mono_quotient(
    m: tuple[int, ...], d: tuple[int, ...]
) -> tuple[int, ...] | None:
    """Monomial m / d as a multiset difference, or None if d ∤ m."""
    out = list(m)
    for v in d:
        try:
            out.remove(v)
        except ValueError:
            return None
    return tuple(out)


def _grlex_key(m: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """min() over these keys picks the graded-lex leading monomial."""
    return (-len(m), m)


def _divide_exact(R: PolyRing, num: Poly, den: Poly) -> Poly | None:
    """The quotient q with q·den == num exactly, else None.

    Single-divisor division along the graded-lex order; exactness makes
    the order choice immaterial.  Used to certify unit cofactors."""
    K = R.K
    lead_d = min(den, key=_grlex_key)
    cd = den[lead_d]
    rem = dict(num)
    q: Poly = {}
    while rem:
        lead_r = min(rem, key=_grlex_key)
        t = _mono_quotient(lead_r, lead_d)
        if t is None:
            return None
        c = K.div(rem[lead_r], cd)
        s = K.add(q.get(t, K.zero), c)
        if K.is_zero(s):
            q.pop(t, None)
        else:
            q[t] = s
        rem = R.sub(rem, R.mul({t: c}, den))
    return q


class Eliminator:
    """Triangular elimination over the λ-variables.

    Relations whose highest-offset variables all occur linearly with
    constant coefficients are solved for the variable with the largest
    owner rank at that offset, smallest offsets first; the substitution
    map is kept closed.  A nonzero constant marks the system — and the
    cell — as empty.  Whatever survives ``run`` plus the final
    ``finalize`` phase is the residual system."""

    def __init__(self, ctx: SolveContext, *, tie_break: str = "default") -> None:
        self.ctx = ctx
        self.R = ctx.R
        self.subs: dict[int, Poly] = {}
        self.pivots: list[int] = []
        self.relations: list[Relation] = []
        self.excluded: set[int] = set()
        self.is_empty = False
        self.empty_source: str | None = None
        self.tie_break = tie_break

    def clone(self) -> "Eliminator":
        other = Eliminator.__new__(Eliminator)
        other.ctx = self.ctx
        other.R = self.R
        other.subs = dict(self.subs)
        other.pivots = list(self.pivots)
        other.relations = list(self.relations)
        other.excluded = set(self.excluded)
        other.is_empty = self.is_empty
        other.empty_source = self.empty_source
        other.tie_break = self.tie_break
        return other

    def add(self, rels: Iterable[Relation]) -> None:
        if self.is_empty:
            return
        R = self.R
        for rel in rels:
            p = R.substitute(rel.poly, self.subs) if self.subs else rel.poly
            if p:
                self.relations.append(Relation(p, rel.source))

    def _record_div(self, c) -> None:
        if self.ctx.record_primes:
            self.excluded.update(rational_prime_factors(c))

    def _classify(self, p: Poly) -> tuple[str, int | None, int]:
        """("const"|"linear"|"residual", pivot var, leading offset)."""
        offset = self.ctx.vs.offset
        K = -1
        for mono in p:
            for v in mono:
                o = offset[v]
                if o > K:
                    K = o
        if K < 0:
            return ("const", None, -1)
        leading: list[int] = []
        for mono in p:
            if not mono:
                continue
            if any(offset[v] == K for v in mono):
                if len(mono) > 1:
                    return ("residual", None, K)
                leading.append(mono[0])
        rank = self.ctx.vs.rank
        pivot = max(leading, key=lambda v: rank[v])
        return ("linear", pivot, K)

    def _general_candidates(self) -> list[tuple[int, int, int, int]]:
        """Fallback pivots: (relation, v) where v's coefficient within
        the relation is a nonzero constant — the relation reads c*v plus
        monomials not involving v.  Solving for v and substituting the
        (polynomial) expression through every other relation is a graph
        projection — an isomorphism of the variety — whatever v's offset
        is relative to the rest."""
        offset = self.ctx.vs.offset
        rank = self.ctx.vs.rank
        out: list[tuple[int, int, int, int]] = []
        for idx, rel in enumerate(self.relations):
            for mono in rel.poly:
                if len(mono) != 1:
                    continue
                v = mono[0]
                if not any(v in m and m != (v,) for m in rel.poly):
                    out.append((offset[v], -rank[v], idx, v))
        return out

    def run(self) -> None:
        if self.is_empty:
            return
        while True:
            kept: list[Relation] = []
            for rel in self.relations:
                p = rel.poly
                if not p:
                    continue
                if len(p) == 1 and () in p:
                    self.is_empty = True
                    self.empty_source = rel.source
                    self._record_div(p[()])
                    self.relations = []
                    return
                kept.append(rel)
            self.relations = kept
            cands: list[tuple[int, int, int, int]] = []
            for idx, rel in enumerate(self.relations):
                tag, pivot, K = self._classify(rel.poly)
                if tag == "linear":
                    assert pivot is not None
                    cands.append((K, -self.ctx.vs.rank[pivot], idx, pivot))
            if not cands:
                cands = self._general_candidates()
            if not cands:
                return
            if self.tie_break == "default":
                _, _, idx, pivot = min(cands)
            else:
                _, _, idx, pivot = min(cands, key=lambda t: (t[0], -t[1], -t[2]))
            self._eliminate(idx, pivot)

    def _unit_candidates(self) -> list[tuple[int, int, int, int, object]]:
        """Final-phase pivots: (relation R, v) where v lives in R alone,
        to the first power in every monomial of R containing it, and
        some *other* surviving relation certifies that v's cofactor A is
        nowhere zero on the residual variety: a relation A·C − c with c
        a nonzero constant forces A·C = c ≠ 0 at every solution."""
        offset = self.ctx.vs.offset
        rank = self.ctx.vs.rank
        K = self.R.K
        occ: dict[int, list[int]] = {}
        for idx, rel in enumerate(self.relations):
            for v in {w for m in rel.poly for w in m}:
                occ.setdefault(v, []).append(idx)
        out: list[tuple[int, int, int, int, object]] = []
        for v, idxs in occ.items():
            if len(idxs) != 1:
                continue
            idx = idxs[0]
            poly = self.relations[idx].poly
            cof: Poly = {}
            simple = True
            for m, c in poly.items():
                if v not in m:
                    continue
                if m.count(v) > 1:
                    simple = False
                    break
                cof[_mono_strip(m, v)] = c
            if not simple or not cof or all(not m for m in cof):
                continue
            for jdx, other in enumerate(self.relations):
                if jdx == idx:
                    continue
                c0 = other.poly.get(())
                if c0 is None or K.is_zero(c0):
                    continue
                body = {m: c for m, c in other.poly.items() if m}
                if _divide_exact(self.R, body, cof) is not None:
                    out.append((offset[v], -rank[v], idx, v, c0))
                    break
        return out

    def finalize(self) -> None:
        """Last elimination phase; call only once no further relations
        will be added.  Each certified candidate (see _unit_candidates)
        is projected away: on the residual variety its cofactor A never
        vanishes, so v = −B/A is the graph of a regular function over
        the remaining system and dropping v with its relation is a
        bijection on points.  The expression is rational, so it is never
        folded into ``subs``; the pivot is only counted.  The bijection
        needs the certificate constant c to stay nonzero, so c's prime
        factors join the exclusions."""
        if self.is_empty:
            return
        self.run()
        while True:
            cands = self._unit_candidates()
            if not cands:
                return
            if self.tie_break == "default":
                key = lambda t: (t[0], t[1], t[2], t[3])
            else:
                key = lambda t: (t[0], -t[1], -t[2], t[3])
            _, _, idx, pivot, c0 = min(cands, key=key)
            self._record_div(c0)
            self.relations.pop(idx)
            self.pivots.append(pivot)

    def _eliminate(self, idx: int, pivot: int) -> None:
        R = self.R
        K = R.K
        rel = self.relations.pop(idx)
        c = rel.poly[(pivot,)]
        self._record_div(c)
        rest = {m: v for m, v in rel.poly.items() if m != (pivot,)}
        expr = R.scale(rest, K.div(K.neg(K.one), c))
        one_sub = {pivot: expr}
        for k in list(self.subs):
            self.subs[k] = R.substitute(self.subs[k], one_sub)
        self.subs[pivot] = expr
        self.pivots.append(pivot)
        self.relations = [
            Relation(R.substitute(r.poly, one_sub), r.source)
            if any(pivot in m for m in r.poly)
            else r
            for r in self.relations
        ]


# ---------------------------------------------------------------------------
# Cell analysis
# ---------------------------------------------------------------------------


@dataclass
class CellAnalysis:
    """Outcome of solving one flag's defining system.

    ``status`` is "affine" (dim = vars − pivots), "empty" (a nonzero
    constant relation appeared), or "nonaffine" (a residual system
    survives; ``free`` counts the solved-for-free coordinates outside
    it).  ``residual`` polynomials use variable ids resolved by
    ``var_names``/``var_offsets``.  ``substitutions`` is None for cells
    restored from a serialized form."""

    flag: DFlag
    status: str
    n_vars: int | None
    n_pivots: int | None
    dim: int | None
    free: int | None
    residual: tuple[Poly, ...]
    residual_vars: tuple[int, ...]
    var_names: dict[int, str]
    var_offsets: dict[int, int]
    excluded_primes: frozenset[int]
    substitutions: dict[int, Poly] | None


def _finish(
    ctx: SolveContext,
    flag: DFlag,
    elim: Eliminator,
    n_vars: int,
    residual_cap: int,
) -> CellAnalysis:
    if not elim.is_empty and elim.relations:
        # The final phase drops relations irreversibly, so it runs on a
        # clone: the caller may still extend the original with deeper
        # flag levels.
        elim = elim.clone()
        elim.finalize()
    excluded = frozenset(ctx.ring.excluded_primes) | frozenset(elim.excluded)
    if elim.is_empty:
        return CellAnalysis(
            flag, "empty", n_vars, len(elim.pivots), None, None,
            (), (), {}, {}, excluded, dict(elim.subs),
        )
    residual = tuple(r.poly for r in elim.relations if r.poly)
    if residual:
        rvars = sorted({v for p in residual for m in p for v in m})
        if len(rvars) > residual_cap:
            raise ResidualTooLarge(
                f"residual too large: {len(rvars)} variables exceed cap "
                f"{residual_cap} for flag {flag.base.d_set} + {flag.added_gaps}"
            )
        vs = ctx.vs
        return CellAnalysis(
            flag, "nonaffine", n_vars, len(elim.pivots), None,
            n_vars - len(elim.pivots) - len(rvars),
            residual, tuple(rvars),
            {v: vs.name[v] for v in rvars},
            {v: vs.offset[v] for v in rvars},
            excluded, dict(elim.subs),
        )
    return CellAnalysis(
        flag, "affine", n_vars, len(elim.pivots), n_vars - len(elim.pivots),
        None, (), (), {}, {}, excluded, dict(elim.subs),
    )


def solve_cell(
    flag: DFlag,
    ring: PlaneCurveRing,
    *,
    residual_cap: int = 12,
    bound_factor: int = 1,
    tie_break: str = "default",
    ctx: SolveContext | None = None,
) -> CellAnalysis:
    """Solve the defining system of one flag cell.

    Builds the base frame plus one level template per adjoined gap, adds
    every level's syzygy relations and the containment relations between
    consecutive levels, and eliminates."""
    _check_same_curve(flag.base.sg, ring)
    if ctx is None:
        ctx = SolveContext(ring, bound_factor)
    elim = Eliminator(ctx, tie_break=tie_break)
    frame, n_vars = _base_frame(ctx, flag.base)
    elim.add(_level_relations(ctx, frame, 0))
    elim.run()
    levels = flag.levels()
    prev = frame
    for i, g in enumerate(flag.added_gaps, start=1):
        if elim.is_empty:
            break
        new_frame, hn = _extend_frame(ctx, prev, levels[i], g, i)
        n_vars += hn
        elim.add(_containment_relations(ctx, prev, new_frame, g, i))
        elim.add(_level_relations(ctx, new_frame, i))
        elim.run()
        prev = new_frame
    return _finish(ctx, flag, elim, n_vars, residual_cap)


def _poly_str(p: Poly, names: dict[int, str]) -> str:
    if not p:
        return "0"
    parts = []
    for m, c in sorted(p.items(), key=lambda kv: (len(kv[0]), kv[0])):
        mono = "*".join(names.get(v, f"v{v}") for v in m)
        parts.append(f"{c}" if not mono else f"{c}*{mono}")
    return " + ".join(parts)


def cell_report(cell: CellAnalysis) -> dict:
    """JSON-ready per-cell report."""
    return {
        "d0_primitive": list(primitive_dset(cell.flag.base)),
        "gaps": list(cell.flag.added_gaps),
        "status": cell.status,
        "dim": cell.dim,
        "free": cell.free,
        "residual": [_poly_str(p, cell.var_names) for p in cell.residual],
        "excluded_primes": sorted(cell.excluded_primes),
    }


# ---------------------------------------------------------------------------
# Closed-form dimension change for the x = z^4 family
# ---------------------------------------------------------------------------


def closed_form_mu(module: GammaModule, g: int, u: int, v: int) -> int:
    """Dimension change when the gap g is adjoined to the module, for
    curves x = z^4, y = z^(2u) + z^v with u, v odd and v > 2u.

    For g ≡ 1, 3 (mod 4) it is the number of gaps of Δ∪{g} in [g, g+4);
    for g ≡ 2 (mod 4) subtract the same count shifted by n, the smallest
    odd element of (Δ ∪ {v}) ∩ [2u, ∞)."""
    if u % 2 == 0 or v % 2 == 0 or v <= 2 * u:
        raise ValueError("family precondition violated: need odd u, v with v > 2u")
    sg = module.sg
    family = semigroup_generate((4, 2 * u, 2 * u + v))
    if family.gaps != sg.gaps:
        raise ValueError(
            "family precondition violated: the module's semigroup is not "
            f"the one generated by (4, {2 * u}, {2 * u + v})"
        )
    module_from_dset(sg, module.d_set + (g,))  # validates g and the closure
    dgaps = [x for x in module.delta_gaps() if x != g]

    def gamma(bound: int) -> int:
        return sum(1 for x in dgaps if x >= bound)

    base = gamma(g) - gamma(g + 4)
    if g % 4 != 2:
        return base
    n = 2 * u + 1
    while not (n in module or n == v):
        n += 2
    return base - (gamma(g + n) - gamma(g + 4 + n))


# ---------------------------------------------------------------------------
# Whole-curve driver
# ---------------------------------------------------------------------------


def _solve_base_group(
    ctx: SolveContext,
    base: GammaModule,
    dset_index: set[tuple[int, ...]],
    m_max: int,
    residual_cap: int,
    tie_break: str = "default",
) -> list[CellAnalysis]:
    """All cells whose flag starts at the given base module, in
    pre-order over the gap prefixes.  Level-0 work is shared by every
    flag of the group; an inconsistent prefix marks its whole subtree
    empty without further solving."""
    sg = ctx.sg
    results: list[CellAnalysis] = []
    elim0 = Eliminator(ctx, tie_break=tie_break)
    frame0, n0 = _base_frame(ctx, base)
    elim0.add(_level_relations(ctx, frame0, 0))
    elim0.run()
    results.append(_finish(ctx, DFlag(base, ()), elim0, n0, residual_cap))
    gaps = base.delta_gaps()

    def rec(
        prev_frame: Frame,
        prev_elim: Eliminator,
        n_vars: int,
        d_cur: tuple[int, ...],
        added: tuple[int, ...],
    ) -> None:
        level = len(added) + 1
        if level > m_max:
            return
        last = added[-1] if added else -1
        for g in gaps:
            if g <= last:
                continue
            d_new = tuple(sorted(d_cur + (g,)))
            if d_new not in dset_index:
                continue
            flag = DFlag(base, added + (g,))
            if prev_elim.is_empty:
                results.append(
                    CellAnalysis(
                        flag, "empty", None, None, None, None, (), (), {}, {},
                        frozenset(ctx.ring.excluded_primes)
                        | frozenset(prev_elim.excluded),
                        None,
                    )
                )
                rec(prev_frame, prev_elim, n_vars, d_new, added + (g,))
                continue
            new_mod = module_from_dset(sg, d_new)
            new_frame, hn = _extend_frame(ctx, prev_frame, new_mod, g, level)
            elim = prev_elim.clone()
            elim.add(_containment_relations(ctx, prev_frame, new_frame, g, level))
            elim.add(_level_relations(ctx, new_frame, level))
            elim.run()
            results.append(_finish(ctx, flag, elim, n_vars + hn, residual_cap))
            rec(new_frame, elim, n_vars + hn, d_new, added + (g,))

    rec(frame0, elim0, n0, base.d_set, ())
    return results


def curve_key(ring: PlaneCurveRing) -> str:
    """Stable identity of a curve + field + truncation, for checkpoints."""
    K = ring.field
    tag = "Q" if isinstance(K, RationalField) else f"F{getattr(K, 'size', '?')}"
    blob = json.dumps(
        [sorted(ring.x_poly.items()), sorted(ring.y_poly.items()), ring.trunc, tag]
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class CheckpointStore:
    """Append-only JSONL store of solved base groups, keyed by curve."""

    def __init__(self, path: str, ring: PlaneCurveRing) -> None:
        self.path = path
        self.key = curve_key(ring)
        self.groups: dict[str, list[dict]] = {}
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                header = json.loads(fh.readline())
                if header.get("curve") != self.key:
                    raise ValueError(
                        f"checkpoint {path} belongs to a different curve"
                    )
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self.groups[rec["key"]] = rec["cells"]
        else:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"curve": self.key}) + "\n")

    def get(self, d_set: tuple[int, ...]) -> list[dict] | None:
        return self.groups.get(",".join(map(str, d_set)))

    def put(self, d_set: tuple[int, ...], cells: list[dict]) -> None:
        key = ",".join(map(str, d_set))
        self.groups[key] = cells
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"key": key, "cells": cells}) + "\n")


def cell_to_dict(cell: CellAnalysis) -> dict:
    """Serializable form of a cell (drops the substitution map; residual
    variables are renumbered 0..k−1 in the order of residual_vars)."""
    remap = {v: i for i, v in enumerate(cell.residual_vars)}
    residual = [
        [
            [sorted(remap[v] for v in m), [str(c.numerator), str(c.denominator)]]
            for m, c in sorted(p.items())
        ]
        for p in cell.residual
    ]
    return {
        "d_set": list(cell.flag.base.d_set),
        "gaps": list(cell.flag.added_gaps),
        "status": cell.status,
        "n_vars": cell.n_vars,
        "n_pivots": cell.n_pivots,
        "dim": cell.dim,
        "free": cell.free,
        "residual": residual,
        "var_names": [cell.var_names[v] for v in cell.residual_vars],
        "var_offsets": [cell.var_offsets[v] for v in cell.residual_vars],
        "excluded_primes": sorted(cell.excluded_primes),
    }


def cell_from_dict(data: dict, sg: Semigroup, field=None) -> CellAnalysis:
    """Inverse of cell_to_dict (over the rationals unless a field is given)."""
    K = field if field is not None else RationalField()
    flag = DFlag(module_from_dset(sg, data["d_set"]), tuple(data["gaps"]))
    residual = []
    for poly in data["residual"]:
        p: Poly = {}
        for mono, (num, den) in poly:
            c = K.div(K.from_int(int(num)), K.from_int(int(den)))
            p[tuple(mono)] = c
        residual.append(p)
    rvars = tuple(range(len(data["var_names"])))
    return CellAnalysis(
        flag=flag,
        status=data["status"],
        n_vars=data["n_vars"],
        n_pivots=data["n_pivots"],
        dim=data["dim"],
        free=data["free"],
        residual=tuple(residual),
        residual_vars=rvars,
        var_names=dict(enumerate(data["var_names"])),
        var_offsets=dict(enumerate(data["var_offsets"])),
        excluded_primes=frozenset(data["excluded_primes"]),
        substitutions=None,
    )


_WORKER: dict = {}


def _worker_init(x_poly_items, y_poly_items, trunc, m_max, residual_cap, bound_factor):
    ring = valuation_basis(
        dict(x_poly_items), dict(y_poly_items), RationalField(), trunc=trunc
    )
    mods = enumerate_standard_modules(ring.semigroup)
    _WORKER["ctx"] = SolveContext(ring, bound_factor)
    _WORKER["dset_index"] = {m.d_set for m in mods}
    _WORKER["m_max"] = m_max
    _WORKER["residual_cap"] = residual_cap


def _worker_solve(d_set: tuple[int, ...]) -> list[dict]:
    ctx = _WORKER["ctx"]
    base = module_from_dset(ctx.sg, d_set)
    cells = _solve_base_group(
        ctx, base, _WORKER["dset_index"], _WORKER["m_max"], _WORKER["residual_cap"]
    )
    return [cell_to_dict(c) for c in cells]


def analyze_curve(
    ring: PlaneCurveRing,
    *,
    m_max: int | None = None,
    jobs: int = 1,
    residual_cap: int = 12,
    bound_factor: int = 1,
    checkpoint: str | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> list[CellAnalysis]:
    """Solve every cell of the curve: all standard modules and all flags
    over them up to length m_max (default: multiplicity − 1, the largest
    possible).  Returns cells grouped by base module in enumeration
    order, each group in pre-order over gap prefixes.

    With jobs > 1 the base groups are solved in worker processes (the
    curve must be over the rationals); per-group results are checkpointed
    to the given JSONL path if provided, and already-checkpointed groups
    are not re-solved."""
    sg = ring.semigroup
    mods = enumerate_standard_modules(sg)
    dset_index = {m.d_set for m in mods}
    if m_max is None:
        m_max = sg.multiplicity() - 1
    store = CheckpointStore(checkpoint, ring) if checkpoint else None
    out: list[CellAnalysis] = []
    total = len(mods)

    if jobs > 1:
        if not isinstance(ring.field, RationalField):
            raise ValueError("parallel analysis requires a ring over the rationals")
        todo = [m.d_set for m in mods if store is None or store.get(m.d_set) is None]
        solved: dict[tuple[int, ...], list[dict]] = {}
        if todo:
            with ProcessPoolExecutor(
                max_workers=jobs,
                initializer=_worker_init,
                initargs=(
                    tuple(ring.x_poly.items()),
                    tuple(ring.y_poly.items()),
                    ring.trunc,
                    m_max,
                    residual_cap,
                    bound_factor,
                ),
            ) as pool:
                done = 0
                for d_set, cells in zip(todo, pool.map(_worker_solve, todo)):
                    solved[d_set] = cells
                    if store:
                        store.put(d_set, cells)
                    done += 1
                    if progress:
                        progress(done, len(todo))
        for mod in mods:
            data = solved.get(mod.d_set)
            if data is None:
                assert store is not None
                data = store.get(mod.d_set)
                assert data is not None
            out.extend(cell_from_dict(d, sg) for d in data)
        return out

    ctx = SolveContext(ring, bound_factor)
    for i, base in enumerate(mods):
        cached = store.get(base.d_set) if store else None
        if cached is not None:
            out.extend(cell_from_dict(d, sg) for d in cached)
        else:
            cells = _solve_base_group(ctx, base, dset_index, m_max, residual_cap)
            if store:
                store.put(base.d_set, [cell_to_dict(c) for c in cells])
            out.extend(cells)
        if progress:
            progress(i + 1, total)
    return out
