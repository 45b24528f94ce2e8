"""Standard modules over a numerical semigroup, and flags of them.

A *standard module* over a numerical semigroup Gamma is a set
``Delta = Gamma ∪ D`` for some subset ``D`` of the gap set ``G`` with
``Delta + Gamma ⊆ Delta``; the subset ``D = Delta ∩ G`` is its *D-set*
and determines it.  A *flag* is a chain ``D_0 ⊂ D_1 ⊂ ... ⊂ D_m`` of
D-sets obtained by adjoining gaps ``g_1 < g_2 < ... < g_m`` one at a
time, every intermediate level again a D-set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .semigroup import Semigroup


@dataclass(frozen=True)
class GammaModule:
    """A standard module Delta = Gamma ∪ D, stored as its D-set plus a
    dense membership table for Delta on [0, c]."""

    sg: Semigroup
    d_set: tuple[int, ...]
    delta_members: tuple[bool, ...]

    def __contains__(self, n: int) -> bool:
        if n >= self.sg.conductor:
            return True
        return n >= 0 and self.delta_members[n]

    @property
    def d_size(self) -> int:
        return len(self.d_set)

    def degree(self) -> int:
        """Number of gaps of Delta, i.e. delta - |D|."""
        return self.sg.delta - len(self.d_set)

    def delta_gaps(self) -> tuple[int, ...]:
        """Gaps of Delta itself: G minus D."""
        d = set(self.d_set)
        return tuple(g for g in self.sg.gaps if g not in d)

    def apery(self) -> tuple[int, ...]:
        """Smallest element of Delta in each residue class mod the multiplicity."""
        e = self.sg.multiplicity()
        out: list[int | None] = [None] * e
        found, n = 0, 0
        while found < e:
            if out[n % e] is None and n in self:
                out[n % e] = n
                found += 1
            n += 1
        return tuple(out)  # type: ignore[arg-type]


def module_from_dset(sg: Semigroup, d_set: Iterable[int]) -> GammaModule:
    """Build and validate the standard module with the given D-set."""
    d = tuple(sorted(set(int(g) for g in d_set)))
    gap_set = set(sg.gaps)
    for g in d:
        if g not in gap_set:
            raise ValueError(f"{g} is not a gap of the semigroup")
    members = list(sg.members)
    for g in d:
        members[g] = True

    def in_delta(n: int) -> bool:
        return n >= sg.conductor or members[n]

    for g in d:
        for gen in sg.generators:
            if not in_delta(g + gen):
                raise ValueError(
                    f"D = {d} is not a D-set: {g} + {gen} = {g + gen} escapes the module"
                )
    return GammaModule(sg=sg, d_set=d, delta_members=tuple(members))


def closure(primitive: Iterable[int], sg: Semigroup) -> GammaModule:
    """Smallest standard module whose D-set contains the given gaps."""
    prim = sorted(set(int(g) for g in primitive))
    d: set[int] = set()
    for p in prim:
        for g in sg.gaps:
            if g >= p and (g - p) in sg:
                d.add(g)
    return module_from_dset(sg, d)


def primitive_dset(mod: GammaModule) -> tuple[int, ...]:
    """Minimal gaps generating the module over the semigroup: the elements
    of D not of the form d' + gamma with d' in D and gamma in Gamma, gamma > 0."""
    d = mod.d_set
    return tuple(
        g for g in d if not any(g > g2 and (g - g2) in mod.sg for g2 in d)
    )


def enumerate_standard_modules(sg: Semigroup) -> list[GammaModule]:
    """All standard modules, ordered by (|D|, lexicographic D).

    Gaps are decided largest-first; a gap may enter D only if its whole
    forward orbit under the generators stays inside the part of the module
    already decided, which prunes invalid branches immediately.
    """
    gaps_desc = sorted(sg.gaps, reverse=True)
    gens = sg.generators
    results: list[tuple[int, ...]] = []
    chosen: set[int] = set()

    def in_delta_so_far(n: int) -> bool:
        return n in sg or n in chosen

    def decide(i: int) -> None:
        if i == len(gaps_desc):
            results.append(tuple(sorted(chosen)))
            return
        g = gaps_desc[i]
        decide(i + 1)
        if all(in_delta_so_far(g + gen) for gen in gens):
            chosen.add(g)
            decide(i + 1)
            chosen.remove(g)

    decide(0)
    results.sort(key=lambda d: (len(d), d))
    return [module_from_dset(sg, d) for d in results]


@dataclass(frozen=True)
class DFlag:
    """A flag D_0 ⊂ D_1 ⊂ ... ⊂ D_m of D-sets: base module plus the
    strictly increasing gaps g_1 < ... < g_m adjoined one per level."""

    base: GammaModule
    added_gaps: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.added_gaps)

    def level_dsets(self) -> tuple[tuple[int, ...], ...]:
        """D-sets of all levels D_0, D_1, ..., D_m."""
        out = [self.base.d_set]
        cur = self.base.d_set
        for g in self.added_gaps:
            cur = tuple(sorted(cur + (g,)))
            out.append(cur)
        return tuple(out)

    def levels(self) -> tuple[GammaModule, ...]:
        return tuple(module_from_dset(self.base.sg, d) for d in self.level_dsets())


def enumerate_dflags(
    sg: Semigroup, modules: Sequence[GammaModule], m: int
) -> list[DFlag]:
    """All flags of length exactly m whose every level is a standard module.

    Requires ``modules`` to be the complete enumeration for ``sg``.  Each
    base contributes the chains g_1 < ... < g_m of gaps of its Delta for
    which every prefix level is again a D-set.  For every emitted flag the
    singleton extensions D_0 ∪ {g_i} are asserted to be D-sets as well
    (they always are, for value semigroups of unibranch germs).
    """
    module_set = {mod.d_set for mod in modules}
    flags: list[DFlag] = []

    for base in modules:
        base_gaps = base.delta_gaps()

        def extend(d_cur: tuple[int, ...], added: tuple[int, ...]) -> None:
            if len(added) == m:
                for g in added:
                    assert tuple(sorted(base.d_set + (g,))) in module_set, (
                        f"singleton extension {base.d_set} + {g} is not a D-set"
                    )
                flags.append(DFlag(base=base, added_gaps=added))
                return
            last = added[-1] if added else -1
            for g in base_gaps:
                if g <= last:
                    continue
                nd = tuple(sorted(d_cur + (g,)))
                if nd in module_set:
                    extend(nd, added + (g,))

        extend(base.d_set, ())
    return flags
