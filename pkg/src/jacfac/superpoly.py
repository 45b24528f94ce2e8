"""Assembly of the geometric superpolynomial from flag cell counts.

The superpolynomial is a trivariate polynomial in q, t, a with integer
coefficients, stored sparsely as ``{(q_deg, t_deg, a_deg): coeff}``.  A
flag cell with base D-set ``D_0``, flag length ``m`` and count polynomial
``sum_d c_d q_f^d`` contributes ``sum_d c_d q^(|D_0|+m) t^(delta-d) a^m``.

This module also provides the parameter specializations used to compare
against reference data: the t=1 slice, the betti polynomial H(q=1, t, a=0),
the standard-variable substitution, and a superduality check.  Reference
polynomials are stored as plain-text expressions (see ``parse_poly_text``)
under ``fixtures/<id>/<slice>.poly``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .counting import CellCount

# (q_deg, t_deg, a_deg) -> integer coefficient
TriPoly = dict[tuple[int, int, int], int]


class AssemblyError(ValueError):
    """Raised when counts cannot be assembled into a superpolynomial."""


@dataclass(frozen=True)
class Superpolynomial:
    """An assembled superpolynomial with its provenance metadata.

    ``truncated`` records that flags were only analyzed up to ``m_max``
    even though longer flags exist (m_max < multiplicity - 1); in that
    case the coefficients of ``a^m`` for m > m_max are absent, not zero.
    """

    poly: TriPoly
    delta: int
    m_max: int
    truncated: bool
    curve: str = ""

    def a_powers(self) -> tuple[int, ...]:
        """The a-degrees this assembly covers (complete coefficients)."""
        return tuple(range(self.m_max + 1))


def _tp(obj: "Superpolynomial | TriPoly") -> TriPoly:
    return obj.poly if isinstance(obj, Superpolynomial) else obj


def assemble(
    counts: Iterable[CellCount],
    *,
    delta: int,
    multiplicity: int,
    m_max: int,
    curve: str = "",
) -> Superpolynomial:
    """Aggregate flag cell counts into the superpolynomial.

    Every count must be definite: a cell whose status is
    ``empty-over-tested-fields`` (no point over any sampled field, but
    emptiness not proven) poisons the sum and raises ``AssemblyError``.
    """
    limbo = [
        cc
        for cc in counts
        if cc.status == "empty-over-tested-fields"
    ]
    if limbo:
        labels = ", ".join(
            f"D0={list(cc.cell.flag.base.d_set)} gaps={list(cc.cell.flag.added_gaps)}"
            for cc in limbo[:5]
        )
        more = "" if len(limbo) <= 5 else f" (+{len(limbo) - 5} more)"
        raise AssemblyError(
            f"{len(limbo)} cell(s) empty over all tested fields but not proven "
            f"empty; refusing to assemble: {labels}{more}"
        )
    poly: TriPoly = {}
    for cc in counts:
        base_size = cc.cell.flag.base.d_size
        m = cc.cell.flag.m
        if m > m_max:
            raise AssemblyError(f"count at flag length {m} exceeds m_max={m_max}")
        for d, c in cc.poly.items():
            if d < 0 or d > delta:
                raise AssemblyError(
                    f"cell dimension {d} outside [0, delta={delta}] for "
                    f"D0={list(cc.cell.flag.base.d_set)} gaps={list(cc.cell.flag.added_gaps)}"
                )
            key = (base_size + m, delta - d, m)
            poly[key] = poly.get(key, 0) + c
    poly = {k: v for k, v in poly.items() if v}
    return Superpolynomial(
        poly=poly,
        delta=delta,
        m_max=m_max,
        truncated=m_max < multiplicity - 1,
        curve=curve,
    )


def superpolynomial(
    ring,
    m_max: int | None = None,
    *,
    jobs: int = 1,
    residual_cap: int = 12,
    bound_factor: int = 1,
    checkpoint=None,
    progress=None,
    schedule: Sequence[int] | None = None,
) -> Superpolynomial:
    """Full pipeline: analyze all flags of ``ring`` up to ``m_max``
    (default: multiplicity - 1), count every cell, and assemble."""
    from .cells import analyze_curve
    from .counting import FIELD_SCHEDULE, count_cells

    e = ring.multiplicity()
    if m_max is None:
        m_max = e - 1
    cells = analyze_curve(
        ring,
        m_max=m_max,
        jobs=jobs,
        residual_cap=residual_cap,
        bound_factor=bound_factor,
        checkpoint=checkpoint,
        progress=progress,
    )
    counts = count_cells(cells, schedule=schedule or FIELD_SCHEDULE)
    label = f"x={poly_in_z_str(ring.x_poly)}, y={poly_in_z_str(ring.y_poly)}"
    return assemble(
        counts,
        delta=ring.semigroup.delta,
        multiplicity=e,
        m_max=m_max,
        curve=label,
    )


def poly_in_z_str(p: Mapping[int, int]) -> str:
    """Render ``{exp: coeff}`` as a readable polynomial in z."""
    if not p:
        return "0"
    parts = []
    for exp in sorted(p):
        c = p[exp]
        if c == 0:
            continue
        mono = "1" if exp == 0 else ("z" if exp == 1 else f"z^{exp}")
        if exp == 0:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append(f"-{mono}")
        else:
            parts.append(f"{c}{mono}")
    out = parts[0]
    for part in parts[1:]:
        out += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
    return out


# ---------------------------------------------------------------------------
# specializations


def specialize(
    poly: "Superpolynomial | TriPoly",
    *,
    q: int | None = None,
    t: int | None = None,
    a: int | None = None,
) -> TriPoly:
    """Substitute integer values for any subset of the variables.

    Substituted variables collapse to exponent 0 in the result keys.
    """
    out: TriPoly = {}
    for (i, j, k), c in _tp(poly).items():
        if q is not None:
            c *= q**i
            i = 0
        if t is not None:
            c *= t**j
            j = 0
        if a is not None:
            c *= a**k
            k = 0
        if c:
            key = (i, j, k)
            out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if v}


def betti_poly(poly: "Superpolynomial | TriPoly") -> dict[int, int]:
    """H(q=1, t, a=0) as ``{t_deg: coeff}``."""
    collapsed = specialize(poly, q=1, a=0)
    return {j: c for (_, j, _), c in collapsed.items()}


def euler_number_of(poly: "Superpolynomial | TriPoly") -> int:
    """H(q=1, t=1, a=0): the point-count Euler characteristic at a^0."""
    collapsed = specialize(poly, q=1, t=1, a=0)
    return collapsed.get((0, 0, 0), 0)


def a_degree(poly: "Superpolynomial | TriPoly") -> int:
    """Largest a-exponent with a nonzero coefficient (-1 for the zero poly)."""
    tp = _tp(poly)
    return max((k for (_, _, k) in tp), default=-1)


@dataclass(frozen=True)
class StandardForm:
    """A polynomial in the standard variables with an exact global
    monomial prefactor whose exponents may be half-integers."""

    poly: TriPoly  # (q_st, t_st, a_st) exponents
    prefactor: tuple[Fraction, Fraction, Fraction]


def to_standard_params(poly: "Superpolynomial | TriPoly") -> StandardForm:
    """Rewrite in the standard variables via t = q_st^2, q = (q_st t_st)^2,
    a = a_st^2 t_st; a monomial q^i t^j a^k becomes
    q_st^(2i+2j) t_st^(2i+k) a_st^(2k)."""
    out: TriPoly = {}
    for (i, j, k), c in _tp(poly).items():
        key = (2 * i + 2 * j, 2 * i + k, 2 * k)
        out[key] = out.get(key, 0) + c
    return StandardForm(
        poly={k: v for k, v in out.items() if v},
        prefactor=(Fraction(0), Fraction(0), Fraction(0)),
    )


def superduality_check(
    poly: "Superpolynomial | TriPoly",
) -> tuple[bool, tuple[int, int] | None]:
    """Does a monomial q^alpha t^beta exist with
    H(q, t, a) = q^alpha t^beta H(1/t, 1/q, a)?

    The substitution sends q^i t^j a^k to q^(alpha-j) t^(beta-i) a^k.
    Applying it twice forces alpha = beta, so candidates are the diagonal
    a^0 monomials (the constant term's image must itself appear).  Returns
    ``(True, (alpha, beta))`` on success, ``(False, None)`` otherwise.
    """
    tp = _tp(poly)
    if not tp:
        return True, (0, 0)
    candidates = sorted({i for (i, j, k) in tp if i == j and k == 0})
    for alpha in candidates:
        image = {}
        ok = True
        for (i, j, k), c in tp.items():
            qi, tj = alpha - j, alpha - i
            if qi < 0 or tj < 0:
                ok = False
                break
            image[(qi, tj, k)] = c
        if ok and image == tp:
            return True, (alpha, alpha)
    return False, None


# ---------------------------------------------------------------------------
# plain-text polynomial expressions


class PolyTextError(ValueError):
    """Raised on a malformed polynomial expression."""


_VARS = {"q": 0, "t": 1, "a": 2}


class _Parser:
    """Recursive-descent parser for integer polynomial expressions in
    q, t, a: integers, ``^`` powers (exponent optionally braced), ``*`` or
    juxtaposition for products, ``+``/``-``, and parentheses."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _take(self) -> str:
        ch = self._peek()
        self.pos += 1
        return ch

    def _error(self, msg: str) -> PolyTextError:
        context = self.text[max(0, self.pos - 20) : self.pos + 20]
        return PolyTextError(f"{msg} at position {self.pos} (near {context!r})")

    def _integer(self) -> int:
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self._error("expected an integer")
        return int(self.text[start : self.pos])

    def _exponent(self) -> int:
        if self._peek() == "{":
            self._take()
            n = self._integer()
            if self._peek() != "}":
                raise self._error("expected '}'")
            self._take()
            return n
        return self._integer()

    def _factor(self) -> TriPoly:
        ch = self._peek()
        if ch == "(":
            self._take()
            inner = self._expr()
            if self._peek() != ")":
                raise self._error("expected ')'")
            self._take()
            base = inner
        elif ch.isdigit():
            return {(0, 0, 0): self._integer()}
        elif ch in _VARS:
            self._take()
            exp = [0, 0, 0]
            exp[_VARS[ch]] = 1
            base = {tuple(exp): 1}
        else:
            raise self._error(f"unexpected character {ch!r}")
        if self._peek() == "^":
            self._take()
            n = self._exponent()
            if n < 0:
                raise self._error("negative exponent")
            result: TriPoly = {(0, 0, 0): 1}
            for _ in range(n):
                result = poly_mul(result, base)
            return result
        return base

    def _term(self) -> TriPoly:
        result = self._factor()
        while True:
            ch = self._peek()
            if ch == "*":
                self._take()
                result = poly_mul(result, self._factor())
            elif ch == "(" or ch.isdigit() or ch in _VARS:
                result = poly_mul(result, self._factor())
            else:
                return result

    def _expr(self) -> TriPoly:
        result: TriPoly = {}
        sign = 1
        if self._peek() == "-":
            self._take()
            sign = -1
        elif self._peek() == "+":
            self._take()
        result = poly_add(result, self._term(), sign)
        while True:
            ch = self._peek()
            if ch == "+":
                self._take()
                result = poly_add(result, self._term(), 1)
            elif ch == "-":
                self._take()
                result = poly_add(result, self._term(), -1)
            else:
                return result

    def parse(self) -> TriPoly:
        result = self._expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise self._error("trailing input")
        return result


def poly_add(p: TriPoly, other: TriPoly, sign: int = 1) -> TriPoly:
    out = dict(p)
    for key, c in other.items():
        out[key] = out.get(key, 0) + sign * c
    return {k: v for k, v in out.items() if v}


def poly_mul(p: TriPoly, other: TriPoly) -> TriPoly:
    out: TriPoly = {}
    for (i1, j1, k1), c1 in p.items():
        for (i2, j2, k2), c2 in other.items():
            key = (i1 + i2, j1 + j2, k1 + k2)
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def parse_poly_text(text: str) -> TriPoly:
    """Parse a polynomial expression in q, t, a into a TriPoly.

    Lines starting with ``#`` are ignored.  Supported syntax: nonnegative
    integer literals, the variables q, t, a, ``^`` powers with optionally
    braced exponents (``q^{10}``), products by ``*`` or juxtaposition,
    ``+`` and ``-``, and nested parentheses.
    """
    stripped = "\n".join(
        line for line in text.splitlines() if not line.lstrip().startswith("#")
    )
    return _Parser(stripped).parse()


def format_poly(poly: "Superpolynomial | TriPoly") -> str:
    """Render as an expanded sum, terms sorted by (a, t, q) degrees,
    e.g. ``1 + q*t + a*q``."""
    tp = _tp(poly)
    if not tp:
        return "0"
    parts: list[tuple[bool, str]] = []
    for (i, j, k) in sorted(tp, key=lambda key: (key[2], key[1], key[0])):
        c = tp[(i, j, k)]
        factors = []
        for name, exp in (("a", k), ("q", i), ("t", j)):
            if exp == 1:
                factors.append(name)
            elif exp > 1:
                factors.append(f"{name}^{exp}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        parts.append((c < 0, body))
    neg, body = parts[0]
    out = ("-" if neg else "") + body
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out


# ---------------------------------------------------------------------------
# reference data


def resolve_fixtures_dir(explicit: str | os.PathLike | None = None) -> Path:
    """Locate the reference-polynomial directory: an explicit argument
    wins, then $JACFAC_FIXTURES, then ``fixtures/`` beside the package
    checkout, then ``fixtures/`` under the working directory."""
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get("JACFAC_FIXTURES")
    if env:
        return Path(env)
    here = Path(__file__).resolve()
    for parent in here.parents:
        cand = parent / "fixtures"
        if cand.is_dir():
            return cand
    return Path.cwd() / "fixtures"


def curve_fixture_id(sg) -> str:
    """Directory name for a curve's reference data: the minimal semigroup
    generators joined by dashes, e.g. ``4-6-13``."""
    return "-".join(str(g) for g in sg.minimal_generators())


def load_fixture(
    fixtures_dir: str | os.PathLike, curve_id: str, slice_name: str
) -> TriPoly:
    """Read ``<fixtures_dir>/<curve_id>/<slice_name>.poly``."""
    path = Path(fixtures_dir) / curve_id / f"{slice_name}.poly"
    return parse_poly_text(path.read_text())


def fixture_slices(fixtures_dir: str | os.PathLike, curve_id: str) -> tuple[str, ...]:
    """Names of the reference slices available for a curve."""
    d = Path(fixtures_dir) / curve_id
    if not d.is_dir():
        return ()
    return tuple(sorted(p.stem for p in d.glob("*.poly")))


def compare_refdata(
    computed: "Superpolynomial | TriPoly",
    reference: TriPoly,
    *,
    slice_name: str = "full",
    a_powers: Iterable[int] | None = None,
) -> list[tuple[tuple[int, int, int], int, int]]:
    """Exact coefficient-wise comparison against a reference polynomial.

    ``slice_name`` selects the specialization applied to ``computed``
    before comparing: ``full`` (none), ``t1`` (t = 1; reference has no t),
    or ``betti`` (q = 1, a = 0; reference is univariate in t).  When
    ``a_powers`` is given (e.g. for a truncated assembly), both sides are
    restricted to those a-degrees first.  Returns the differing monomials
    as ``(key, computed_coeff, reference_coeff)`` sorted by (a, t, q);
    empty means exact agreement.
    """
    if slice_name == "full":
        got = dict(_tp(computed))
    elif slice_name == "t1":
        got = specialize(computed, t=1)
    elif slice_name == "betti":
        got = betti_poly_as_tripoly(computed)
    else:
        raise ValueError(f"unknown slice {slice_name!r}")
    want = dict(reference)
    if a_powers is not None:
        allowed = set(a_powers)
        got = {k: v for k, v in got.items() if k[2] in allowed}
        want = {k: v for k, v in want.items() if k[2] in allowed}
    diffs = []
    for key in set(got) | set(want):
        g, w = got.get(key, 0), want.get(key, 0)
        if g != w:
            diffs.append((key, g, w))
    diffs.sort(key=lambda item: (item[0][2], item[0][1], item[0][0]))
    return diffs


def betti_poly_as_tripoly(poly: "Superpolynomial | TriPoly") -> TriPoly:
    return {(0, j, 0): c for j, c in betti_poly(poly).items()}


def diff_report(
    diffs: Sequence[tuple[tuple[int, int, int], int, int]], limit: int = 20
) -> str:
    """Human-readable mismatch listing for ``compare_refdata`` output."""
    if not diffs:
        return "exact match"
    lines = []
    for (i, j, k), got, want in diffs[:limit]:
        mono = format_poly({(i, j, k): 1})
        lines.append(f"  {mono}: computed {got}, reference {want}")
    if len(diffs) > limit:
        lines.append(f"  ... and {len(diffs) - limit} more")
    return f"{len(diffs)} differing monomial(s):\n" + "\n".join(lines)
