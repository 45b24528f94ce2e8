"""Point counting: a brute-force finite-field oracle and the production
counting of non-affine cells.

The oracle enumerates, over a small finite field, the actual module
flags with the prescribed valuation sets — as chains of x,y-stable
subspaces of O/z^c in reduced echelon form with prescribed pivot
profile — and is independent of the λ-frame solver in representation,
normalization, and elimination.

The production path evaluates a cell's residual polynomial system over
a schedule of small fields, interpolates the count as a polynomial in
the field size, checks integrality and a fresh witness field, and
multiplies by the free affine factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from itertools import combinations, product

from .cells import CellAnalysis
from .fields import FiniteField, RationalField, field_of_size
from .modules import DFlag, GammaModule
from .poly import Poly
from .ring import PlaneCurveRing

#: Sparse integer polynomial in the field-size variable: {degree: coeff}.
CountPoly = dict[int, int]

FIELD_SCHEDULE = (
    2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32,
    37, 41, 43, 47, 49,
)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


class _Space:
    """O/z^c over a finite field, with shift tables for x and y."""

    def __init__(self, ring: PlaneCurveRing) -> None:
        if isinstance(ring.field, RationalField):
            raise ValueError("the brute-force oracle needs a finite-field ring")
        self.K = ring.field
        self.c = ring.semigroup.conductor
        self.x = self._vec(ring.x_series)
        self.y = self._vec(ring.y_series)

    def _vec(self, series) -> list:
        v = [self.K.zero] * self.c
        for e, co in series.coeffs.items():
            if e < self.c:
                v[e] = co
        return v

    def shifted(self, op: list, k: int) -> list:
        """op * z^k as a coordinate vector (mod z^c)."""
        K = self.K
        out = [K.zero] * self.c
        for i, co in enumerate(op):
            if not K.is_zero(co) and i + k < self.c:
                out[i + k] = co
        return out

    def reduce(self, vec: list, rows: dict[int, list]) -> list:
        """Eliminate every coordinate that has a decided pivot row."""
        K = self.K
        out = list(vec)
        for i in range(self.c):
            co = out[i]
            if K.is_zero(co):
                continue
            row = rows.get(i)
            if row is None:
                continue
            for j in range(i, self.c):
                rj = row[j]
                if not K.is_zero(rj):
                    out[j] = K.sub(out[j], K.mul(co, rj))
        return out


def _solve_linear(K, rows: list[tuple[list, object]], n: int):
    """Solve sum_j a[i][j] x_j = b[i] over the field.

    Returns (particular solution, nullspace basis vectors) or None."""
    aug = [list(a) + [b] for a, b in rows]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        src = next(
            (i for i in range(r, len(aug)) if not K.is_zero(aug[i][col])), None
        )
        if src is None:
            continue
        aug[r], aug[src] = aug[src], aug[r]
        inv = K.inv(aug[r][col])
        aug[r] = [K.mul(inv, v) for v in aug[r]]
        for i in range(len(aug)):
            if i != r and not K.is_zero(aug[i][col]):
                f = aug[i][col]
                aug[i] = [K.sub(v, K.mul(f, w)) for v, w in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(aug)):
        if not K.is_zero(aug[i][n]):
            return None
    part = [K.zero] * n
    for i, col in enumerate(pivots):
        part[col] = aug[i][n]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for f in free:
        vec = [K.zero] * n
        vec[f] = K.one
        for i, col in enumerate(pivots):
            vec[col] = K.neg(aug[i][f])
        basis.append(vec)
    return part, basis


def _solutions(K, part: list, basis: list[list]):
    """All points of the affine solution space."""
    if not basis:
        yield list(part)
        return
    elems = list(K.elements())
    for combo in product(elems, repeat=len(basis)):
        vec = list(part)
        for t, bv in zip(combo, basis):
            if K.is_zero(t):
                continue
            for j in range(len(vec)):
                vec[j] = K.add(vec[j], K.mul(t, bv[j]))
        yield vec


def _row_constraints(
    sp: _Space,
    p: int,
    cols: list[int],
    rows: dict[int, list],
    outer: dict[int, list] | None,
) -> list[tuple[list, object]] | None:
    """Linear constraints on the unknown coefficients of row p: stability
    of the subspace under x and y (reduced against the decided rows) and,
    for a nested level, membership of the enclosing subspace."""
    K = sp.K
    sys_rows: list[tuple[list, object]] = []

    def add_block(base_vec: list, col_vecs: list[list]) -> None:
        for j in range(p + 1, sp.c):
            if j in rows:
                continue
            coeffs = [cv[j] for cv in col_vecs]
            rhs = K.neg(base_vec[j])
            if all(K.is_zero(v) for v in coeffs):
                if not K.is_zero(rhs):
                    sys_rows.append(([K.zero] * len(cols), rhs))
            else:
                sys_rows.append((coeffs, rhs))

    for op in (sp.x, sp.y):
        base = sp.reduce(sp.shifted(op, p), rows)
        colv = [sp.reduce(sp.shifted(op, k), rows) for k in cols]
        add_block(base, colv)
    if outer is not None:
        e_p = [K.zero] * sp.c
        e_p[p] = K.one
        base = sp.reduce(e_p, outer)
        colv = []
        for k in cols:
            e_k = [K.zero] * sp.c
            e_k[k] = K.one
            colv.append(sp.reduce(e_k, outer))
        for j in range(sp.c):
            coeffs = [cv[j] for cv in colv]
            rhs = K.neg(base[j])
            if all(K.is_zero(v) for v in coeffs):
                if not K.is_zero(rhs):
                    return None
            else:
                sys_rows.append((coeffs, rhs))
    return sys_rows


def _enumerate_level(
    sp: _Space,
    module: GammaModule,
    outer: dict[int, list] | None,
):
    """All x,y-stable subspaces with the module's valuation profile,
    contained in ``outer`` when given, as {pivot: canonical row}."""
    K = sp.K
    pivots = [p for p in range(sp.c) if p in module]
    nonpiv = [k for k in range(sp.c) if k not in set(pivots)]

    def rec(idx: int, rows: dict[int, list]):
        if idx < 0:
            yield dict(rows)
            return
        p = pivots[idx]
        cols = [k for k in nonpiv if k > p]
        sys_rows = _row_constraints(sp, p, cols, rows, outer)
        if sys_rows is None:
            return
        solved = _solve_linear(K, sys_rows, len(cols))
        if solved is None:
            return
        part, basis = solved
        for sol in _solutions(K, part, basis):
            vec = [K.zero] * sp.c
            vec[p] = K.one
            for k, v in zip(cols, sol):
                vec[k] = v
            rows[p] = vec
            yield from rec(idx - 1, rows)
            del rows[p]

    yield from rec(len(pivots) - 1, {})


def brute_count(ring: PlaneCurveRing, flag: DFlag) -> int:
    """Number of module flags over the finite field with exactly the
    flag's valuation sets, counted by exhaustive stable-subspace
    enumeration (top level first, then nested levels inside it)."""
    if flag.base.sg.gaps != ring.semigroup.gaps:
        raise ValueError("flag does not belong to the ring's value semigroup")
    sp = _Space(ring)
    levels = flag.levels()

    def count_down(i: int, outer: dict[int, list] | None) -> int:
        if i < 0:
            return 1
        total = 0
        for rows in _enumerate_level(sp, levels[i], outer):
            total += count_down(i - 1, rows)
        return total

    return count_down(len(levels) - 1, None)


# ---------------------------------------------------------------------------
# Production counting of analyzed cells
# ---------------------------------------------------------------------------


@dataclass
class CellCount:
    """A cell's point count as a polynomial in the field size."""

    cell: CellAnalysis
    poly: CountPoly
    status: str  # "affine" | "empty" | "counted" | "empty-over-tested-fields"
    fields_used: tuple[int, ...] = ()
    witness: tuple[int, int] | None = None  # (field size, matched count)
    warnings: tuple[str, ...] = ()


class CountingError(ValueError):
    """The residual counts do not interpolate to an integer polynomial."""


def _poly_mod(p: Poly, K) -> dict:
    out = {}
    for mono, c in p.items():
        num = K.from_int(c.numerator)
        den = K.from_int(c.denominator)
        v = K.div(num, den)
        if not K.is_zero(v):
            out[mono] = v
    return out


def _driver_set(polys: list[dict]) -> tuple[int, ...]:
    """Smallest variable set whose exhaustive enumeration makes every
    monomial linear: after deleting driver variables, each monomial
    keeps at most one variable, to the first power.  First match in
    size-then-lexicographic order, so the choice is deterministic."""
    monos = {m for p in polys for m in p if len(m) >= 2}
    if not monos:
        return ()
    pool = sorted({v for m in monos for v in m})
    for size in range(1, len(pool) + 1):
        for cand in combinations(pool, size):
            bs = set(cand)
            if all(sum(1 for v in m if v not in bs) <= 1 for m in monos):
                return cand
    return tuple(pool)


def _residual_count(cell: CellAnalysis, q: int) -> int:
    """Solutions of the residual system over the field with q elements.

    A minimal driver set of variables — chosen so that fixing them
    leaves every monomial with at most one variable, to the first power
    — is explored by depth-first assignment; each consistent driver
    assignment contributes q^(linear vars − rank) through the rank of
    the specialized linear system.  The exploration is pruned early:
    drivers are ordered so that relations lose their driver support as
    soon as possible, a relation reduced to a nonzero constant kills
    its branch, one reduced to a univariate driver polynomial selects
    the root branches instead of enumerating the field, and once no
    relation mentions the remaining drivers the tail is counted as a
    free factor."""
    K = field_of_size(q)
    polys = [p for p in (_poly_mod(r, K) for r in cell.residual) if p]
    active = sorted({v for p in polys for m in p for v in m})
    # variables absent over this field (coefficients vanished) are free
    slack = len(cell.residual_vars) - len(active)
    drivers = _driver_set(polys)

    # order drivers so relations with small driver support complete first
    by_support = sorted(
        polys,
        key=lambda p: (len({v for m in p for v in m if v in set(drivers)}),),
    )
    order: list[int] = []
    dset = set(drivers)
    for p in by_support:
        for v in sorted({v for m in p for v in m if v in dset}):
            if v not in order:
                order.append(v)
    for v in drivers:
        if v not in order:
            order.append(v)
    dpos = {v: i for i, v in enumerate(order)}
    ndrv = len(order)
    linear = [v for v in active if v not in dpos]
    lpos = {v: i for i, v in enumerate(linear)}
    n = len(linear)

    if K.ell == 1:
        p = K.char
        fadd = lambda a, b: (a + b) % p
        fmul = lambda a, b: (a * b) % p
        finv = lambda a: pow(a, p - 2, p)
        fneg = lambda a: (-a) % p
    else:
        addt = [[K.add(a, b) for b in range(q)] for a in range(q)]
        mult = K._mul_table
        invt = K._inv_table
        fadd = lambda a, b: addt[a][b]
        fmul = lambda a, b: mult[a][b]
        finv = lambda a: invt[a]
        fneg = K.neg

    # each relation compiles to {(driver exponent vector, column): coeff}
    # with column = a linear-variable index or -1 for the constant part
    Rel = dict[tuple[tuple[int, ...], int], int]
    rels: list[Rel] = []
    for poly in polys:
        terms: Rel = {}
        for m, c in poly.items():
            exps = [0] * ndrv
            col = -1
            for v in m:
                if v in dpos:
                    exps[dpos[v]] += 1
                else:
                    col = lpos[v]
            key = (tuple(exps), col)
            terms[key] = fadd(terms.get(key, 0), c)
        terms = {k: v for k, v in terms.items() if v}
        if terms:
            rels.append(terms)

    def _powers(x: int, top: int) -> list[int]:
        out = [1] * (top + 1)
        for e in range(1, top + 1):
            out[e] = fmul(out[e - 1], x)
        return out

    def _rank_count(rows: list[list[int]]) -> int:
        """q^(n - rank) for the constant rows, or 0 if inconsistent."""
        pivot_rows: list[tuple[int, list[int]]] = []
        for row in rows:
            row = list(row)
            for col, prow in pivot_rows:
                f = row[col]
                if f:
                    row = [fadd(a, fmul(fneg(f), b)) for a, b in zip(row, prow)]
            lead = next((j for j in range(n) if row[j]), None)
            if lead is None:
                if row[n]:
                    return 0
                continue
            inv = finv(row[lead])
            pivot_rows.append((lead, [fmul(inv, v) for v in row]))
        return q ** (n - len(pivot_rows))

    def _subst(rel: Rel, depth: int, powers: list[int]) -> Rel:
        """Substitute the driver at ``depth`` (powers of its value given)."""
        out: Rel = {}
        for (exps, col), c in rel.items():
            e = exps[depth]
            if e:
                c = fmul(c, powers[e])
                if not c:
                    continue
                exps = exps[:depth] + (0,) + exps[depth + 1 :]
            key = (exps, col)
            s = fadd(out.get(key, 0), c)
            if s:
                out[key] = s
            elif key in out:
                del out[key]
        return out

    def _descend(depth: int, live: list[Rel], rows: list[list[int]]) -> int:
        # harvest relations whose driver support is exhausted
        pending: list[Rel] = []
        for rel in live:
            if any(any(exps[depth:]) for (exps, _col) in rel):
                pending.append(rel)
                continue
            row = [0] * (n + 1)
            for (_exps, col), c in rel.items():
                j = col if col >= 0 else n
                row[j] = fadd(row[j], c)
            if any(row[:n]):
                rows = rows + [row]
            elif row[n]:
                return 0  # constant nonzero relation: no solutions here
        if not pending:
            return q ** (ndrv - depth) * _rank_count(rows)
        # a pure-constraint relation univariate in the next driver:
        # branch only on its roots
        scan: Rel | None = None
        for rel in pending:
            if all(
                col < 0 and not any(exps[depth + 1 :]) for (exps, col) in rel
            ):
                scan = rel
                break
        total = 0
        maxe = max(
            (exps[depth] for rel in pending for (exps, _col) in rel), default=0
        )
        if scan is not None:
            coeffs: dict[int, int] = {}
            for (exps, _col), c in scan.items():
                coeffs[exps[depth]] = fadd(coeffs.get(exps[depth], 0), c)
            for x in range(q):
                powers = _powers(x, maxe)
                val = 0
                for e, c in coeffs.items():
                    val = fadd(val, fmul(c, powers[e]))
                if val:
                    continue
                nxt = [_subst(rel, depth, powers) for rel in pending]
                total += _descend(depth + 1, nxt, rows)
            return total
        for x in range(q):
            powers = _powers(x, maxe)
            nxt = [_subst(rel, depth, powers) for rel in pending]
            total += _descend(depth + 1, nxt, rows)
        return total

    total = _descend(0, rels, [])
    return total * q**slack


def _interpolate(points: list[tuple[int, int]]) -> dict[int, Fraction]:
    """Exact Newton interpolation through (q, count) points."""
    xs = [Fraction(x) for x, _ in points]
    ys = [Fraction(y) for _, y in points]
    n = len(points)
    divided = list(ys)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            divided[i] = (divided[i] - divided[i - 1]) / (xs[i] - xs[i - level])
    # expand Newton form into monomial coefficients
    poly: dict[int, Fraction] = {}
    basis: dict[int, Fraction] = {0: Fraction(1)}
    for i in range(n):
        c = divided[i]
        if c:
            for d, b in basis.items():
                poly[d] = poly.get(d, Fraction(0)) + c * b
        if i < n - 1:
            # basis *= (x - xs[i])
            nb: dict[int, Fraction] = {}
            for d, b in basis.items():
                nb[d + 1] = nb.get(d + 1, Fraction(0)) + b
                nb[d] = nb.get(d, Fraction(0)) - xs[i] * b
            basis = {d: b for d, b in nb.items() if b}
    return {d: c for d, c in poly.items() if c}


def _char_of(q: int) -> int:
    p = 2
    while q % p:
        p += 1
    return p


def allowed_fields(excluded: frozenset[int], schedule=FIELD_SCHEDULE) -> list[int]:
    """Field sizes from the schedule whose characteristic is not excluded."""
    return [q for q in schedule if _char_of(q) not in excluded]


def count_cell(cell: CellAnalysis, *, schedule=FIELD_SCHEDULE) -> CellCount:
    """The cell's point count as an integer polynomial in the field size.

    Affine and empty cells are immediate.  For a non-affine cell the
    residual system is counted exhaustively over enough allowed field
    sizes to interpolate (residual variable count + 2 points), the
    result is checked for integrality and against one further witness
    field, and the free affine factor shifts the polynomial."""
    if cell.status == "affine":
        return CellCount(cell, {cell.dim: 1}, "affine")
    if cell.status == "empty":
        return CellCount(cell, {}, "empty")
    fields = allowed_fields(cell.excluded_primes, schedule)
    need = len(cell.residual_vars) + 2
    if len(fields) < need + 1:
        raise CountingError(
            f"not enough usable field sizes: need {need + 1}, "
            f"have {fields} after excluding {sorted(cell.excluded_primes)}"
        )
    sample, witness_q = fields[:need], fields[need]
    points = [(q, _residual_count(cell, q)) for q in sample]
    interp = _interpolate(points)
    if any(c.denominator != 1 for c in interp.values()):
        raise CountingError(
            f"residual counts {points} do not interpolate integrally: {interp}"
        )
    if any(d > len(cell.residual_vars) for d in interp):
        raise CountingError(
            f"interpolated degree exceeds the variable count: {interp}"
        )
    got = _residual_count(cell, witness_q)
    want = sum(int(c) * witness_q**d for d, c in interp.items())
    if got != want:
        raise CountingError(
            f"witness field {witness_q} disagrees: counted {got}, "
            f"interpolation gives {want}"
        )
    if not interp:
        return CellCount(
            cell,
            {},
            "empty-over-tested-fields",
            tuple(sample),
            (witness_q, got),
            (
                "non-affine residual counted zero points over every tested "
                "field; treated as empty but reported, not dropped",
            ),
        )
    poly = {cell.free + d: int(c) for d, c in interp.items()}
    return CellCount(cell, poly, "counted", tuple(sample), (witness_q, got))


def count_cells(cells, *, schedule=FIELD_SCHEDULE) -> list[CellCount]:
    return [count_cell(c, schedule=schedule) for c in cells]


def euler_number(counts: list[CellCount]) -> int:
    """Sum of the level-zero counts at field size 1 (each affine cell
    contributes one)."""
    total = 0
    for cc in counts:
        if cc.cell.flag.m == 0:
            total += sum(cc.poly.values())
    return total


def count_poly_str(poly: CountPoly, var: str = "q") -> str:
    if not poly:
        return "0"
    parts = []
    for d in sorted(poly, reverse=True):
        c = poly[d]
        if c == 0:
            continue
        term = f"{var}^{d}" if d > 1 else (var if d == 1 else "1")
        if c == 1 and d > 0:
            parts.append(term)
        elif c == -1 and d > 0:
            parts.append(f"-{term}")
        elif d == 0:
            parts.append(str(c))
        else:
            parts.append(f"{c}*{term}")
    return " + ".join(parts).replace("+ -", "- ")
