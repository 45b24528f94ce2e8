"""Superpolynomial assembly, specializations, text format, and reference
comparison.

The text-format parser and the comparison harness are validated on
synthetic inputs first (round trips, planted mismatches); the assembly
is then checked end-to-end against the stored reference polynomials for
the two fastest curves.
"""

from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacfac.counting import CellCount, count_cells
from jacfac.cells import analyze_curve
from jacfac.fields import RationalField
from jacfac.ring import parse_curve, valuation_basis
from jacfac.superpoly import (
    AssemblyError,
    PolyTextError,
    Superpolynomial,
    a_degree,
    assemble,
    betti_poly,
    compare_refdata,
    curve_fixture_id,
    diff_report,
    euler_number_of,
    fixture_slices,
    format_poly,
    load_fixture,
    parse_poly_text,
    poly_add,
    poly_in_z_str,
    poly_mul,
    resolve_fixtures_dir,
    specialize,
    superduality_check,
    superpolynomial,
    to_standard_params,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _ring(curve: str):
    xp, yp = parse_curve(curve)
    return valuation_basis(xp, yp, RationalField())


# ---------------------------------------------------------------------------
# text format: parser first, then the writer against it

tripolys = st.dictionaries(
    st.tuples(
        st.integers(0, 9), st.integers(0, 9), st.integers(0, 4)
    ),
    st.integers(-9, 9).filter(bool),
    max_size=8,
)


class TestPolyText:
    def test_constant(self):
        assert parse_poly_text("7") == {(0, 0, 0): 7}
        assert parse_poly_text("0") == {}

    def test_variables_and_powers(self):
        assert parse_poly_text("q") == {(1, 0, 0): 1}
        assert parse_poly_text("t^3") == {(0, 3, 0): 1}
        assert parse_poly_text("a^{12}") == {(0, 0, 12): 1}
        assert parse_poly_text("q^{10} t^4") == {(10, 4, 0): 1}

    def test_juxtaposition_and_star(self):
        assert parse_poly_text("2 q t") == {(1, 1, 0): 2}
        assert parse_poly_text("2*q*t") == {(1, 1, 0): 2}
        assert parse_poly_text("3 q^2t") == {(2, 1, 0): 3}

    def test_signs(self):
        assert parse_poly_text("1 - q") == {(0, 0, 0): 1, (1, 0, 0): -1}
        assert parse_poly_text("-q + 1") == {(0, 0, 0): 1, (1, 0, 0): -1}
        assert parse_poly_text("q - q") == {}

    def test_nested_parentheses(self):
        got = parse_poly_text("a^2 (q^3 + q^4 (1 + t))")
        assert got == {(3, 0, 2): 1, (4, 0, 2): 1, (4, 1, 2): 1}

    def test_parenthesized_power(self):
        assert parse_poly_text("(1 + q)^2") == {
            (0, 0, 0): 1,
            (1, 0, 0): 2,
            (2, 0, 0): 1,
        }

    def test_comment_lines_ignored(self):
        assert parse_poly_text("# heading\n1 + q\n# tail\n") == {
            (0, 0, 0): 1,
            (1, 0, 0): 1,
        }

    def test_malformed(self):
        for bad in ("q^", "1 +", "(q", "q)", "x", "q^{3", "2 4 x"):
            with pytest.raises(PolyTextError):
                parse_poly_text(bad)

    def test_writer_example(self):
        poly = {(0, 0, 0): 1, (1, 1, 0): 1, (1, 0, 1): 1}
        assert format_poly(poly) == "1 + q*t + a*q"

    def test_writer_negative_and_coeff(self):
        poly = {(2, 0, 0): -3, (0, 0, 0): 1}
        assert format_poly(poly) == "1 - 3*q^2"
        assert format_poly({}) == "0"

    @settings(max_examples=200)
    @given(tripolys)
    def test_round_trip(self, poly):
        assert parse_poly_text(format_poly(poly)) == poly

    @settings(max_examples=50)
    @given(tripolys, tripolys)
    def test_ring_ops_match_parser(self, p1, p2):
        s1, s2 = format_poly(p1), format_poly(p2)
        assert parse_poly_text(f"({s1}) + ({s2})") == poly_add(p1, p2)
        assert parse_poly_text(f"({s1}) ({s2})") == poly_mul(p1, p2)


# ---------------------------------------------------------------------------
# specializations


class TestSpecialize:
    def test_t1(self):
        poly = {(2, 3, 1): 2, (2, 1, 1): 1, (0, 0, 0): 1}
        assert specialize(poly, t=1) == {(2, 0, 1): 3, (0, 0, 0): 1}

    def test_a0(self):
        poly = {(2, 3, 1): 2, (1, 1, 0): 1}
        assert specialize(poly, a=0) == {(1, 1, 0): 1}

    def test_betti(self):
        poly = {(5, 2, 0): 1, (3, 2, 0): 2, (1, 0, 1): 9, (0, 0, 0): 1}
        assert betti_poly(poly) == {2: 3, 0: 1}

    def test_euler(self):
        poly = {(5, 2, 0): 1, (3, 2, 0): 2, (1, 0, 1): 9, (0, 0, 0): 1}
        assert euler_number_of(poly) == 4

    def test_a_degree(self):
        assert a_degree({(0, 0, 3): 1, (9, 9, 1): 4}) == 3
        assert a_degree({}) == -1

    def test_standard_params_monomial(self):
        sf = to_standard_params({(1, 1, 1): 1})
        assert sf.poly == {(4, 3, 2): 1}
        assert sf.prefactor == (Fraction(0), Fraction(0), Fraction(0))

    def test_standard_params_trefoil(self):
        sf = to_standard_params(parse_poly_text("1 + q t + a q"))
        assert sf.poly == parse_poly_text("1 + q^4 t^2 + a^2 q^2 t^3")


class TestSuperduality:
    def test_symmetric_example(self):
        # q^i t^j -> q^(2-j) t^(2-i) fixes this polynomial
        poly = parse_poly_text("1 + q t + q^2 t^2 + a q (1 + q t)")
        ok, ab = superduality_check(poly)
        assert ok and ab == (2, 2)

    def test_failing_example(self):
        assert superduality_check(parse_poly_text("1 + q^2")) == (False, None)

    def test_zero(self):
        assert superduality_check({}) == (True, (0, 0))


# ---------------------------------------------------------------------------
# comparison harness (validated on planted perturbations first)


class TestCompare:
    def test_exact_match_and_planted_diff(self):
        ref = parse_poly_text("1 + 2 q t + a q^3")
        assert compare_refdata(dict(ref), ref) == []
        perturbed = dict(ref)
        perturbed[(1, 1, 0)] += 1
        diffs = compare_refdata(perturbed, ref)
        assert diffs == [((1, 1, 0), 3, 2)]
        assert "computed 3, reference 2" in diff_report(diffs)

    def test_missing_and_extra_monomials(self):
        ref = parse_poly_text("1 + q")
        diffs = compare_refdata(parse_poly_text("1 + t"), ref)
        assert ((1, 0, 0), 0, 1) in diffs and ((0, 1, 0), 1, 0) in diffs

    def test_t1_slice(self):
        computed = parse_poly_text("1 + q^2 t + q^2 t^3 + a q")
        ref = parse_poly_text("1 + 2 q^2 + a q")
        assert compare_refdata(computed, ref, slice_name="t1") == []

    def test_betti_slice(self):
        computed = parse_poly_text("1 + q^2 t + q^3 t + a q")
        ref = parse_poly_text("1 + 2 t")
        assert compare_refdata(computed, ref, slice_name="betti") == []

    def test_a_power_restriction(self):
        computed = parse_poly_text("1 + a q + a^2 q^9")
        ref = parse_poly_text("1 + a q + a^2 q^2")
        assert compare_refdata(computed, ref, a_powers=(0, 1)) == []
        assert compare_refdata(computed, ref) == [((2, 0, 2), 0, 1), ((9, 0, 2), 1, 0)]

    def test_unknown_slice(self):
        with pytest.raises(ValueError):
            compare_refdata({}, {}, slice_name="nope")


# ---------------------------------------------------------------------------
# fixture plumbing


class TestFixtureFiles:
    def test_resolve_explicit_and_env(self, monkeypatch, tmp_path):
        assert resolve_fixtures_dir(tmp_path) == tmp_path
        monkeypatch.setenv("JACFAC_FIXTURES", str(tmp_path / "sub"))
        assert resolve_fixtures_dir() == tmp_path / "sub"

    def test_resolve_walk_up(self, monkeypatch):
        monkeypatch.delenv("JACFAC_FIXTURES", raising=False)
        assert resolve_fixtures_dir() == FIXTURES

    def test_curve_fixture_id(self):
        ring = _ring("x=z^4, y=z^6+z^7")
        assert curve_fixture_id(ring.semigroup) == "4-6-13"

    def test_slices_present(self):
        assert fixture_slices(FIXTURES, "4-6-13") == ("full",)
        assert set(fixture_slices(FIXTURES, "6-8-25")) == {"betti", "t1"}
        assert fixture_slices(FIXTURES, "no-such-curve") == ()

    def test_all_fixtures_parse_with_unit_constant(self):
        for curve_dir in sorted(FIXTURES.iterdir()):
            for slc in fixture_slices(FIXTURES, curve_dir.name):
                poly = load_fixture(FIXTURES, curve_dir.name, slc)
                assert poly, f"{curve_dir.name}/{slc} empty"
                assert all(c > 0 for c in poly.values())
                if slc != "betti":
                    assert poly[(0, 0, 0)] == 1


# ---------------------------------------------------------------------------
# assembly


class TestAssemble:
    def test_trefoil_end_to_end(self):
        ring = _ring("x=z^2, y=z^3")
        H = superpolynomial(ring)
        assert H.poly == parse_poly_text("1 + q t + a q")
        assert H.delta == 1 and H.m_max == 1 and not H.truncated
        assert euler_number_of(H) == 2
        assert superduality_check(H) == (True, (1, 1))

    def test_truncation_marking(self):
        ring = _ring("x=z^2, y=z^3")
        H = superpolynomial(ring, m_max=0)
        assert H.truncated and H.a_powers() == (0,)
        assert H.poly == parse_poly_text("1 + q t")

    def test_limbo_refusal(self):
        ring = _ring("x=z^2, y=z^3")
        cells = analyze_curve(ring, m_max=1)
        counts = count_cells(cells)
        poisoned = [
            CellCount(cc.cell, {}, "empty-over-tested-fields")
            if i == 0
            else cc
            for i, cc in enumerate(counts)
        ]
        with pytest.raises(AssemblyError, match="refusing to assemble"):
            assemble(poisoned, delta=1, multiplicity=2, m_max=1)

    def test_m_max_guard(self):
        ring = _ring("x=z^2, y=z^3")
        counts = count_cells(analyze_curve(ring, m_max=1))
        with pytest.raises(AssemblyError, match="exceeds m_max"):
            assemble(counts, delta=1, multiplicity=2, m_max=0)

    def test_full_4_6_13(self):
        H = superpolynomial(_ring("x=z^4, y=z^6+z^7"))
        ref = load_fixture(FIXTURES, "4-6-13", "full")
        assert compare_refdata(H, ref) == []
        assert euler_number_of(H) == 23
        assert superduality_check(H) == (True, (8, 8))
        assert a_degree(H) == 3

    def test_full_4_6_15(self):
        H = superpolynomial(_ring("x=z^4, y=z^6+z^9"))
        ref = load_fixture(FIXTURES, "4-6-15", "full")
        assert compare_refdata(H, ref) == []
        assert superduality_check(H) == (True, (9, 9))


class TestPolyInZStr:
    def test_rendering(self):
        assert poly_in_z_str({4: 1}) == "z^4"
        assert poly_in_z_str({6: 1, 7: 1}) == "z^6 + z^7"
        assert poly_in_z_str({0: 2, 1: -1, 3: 5}) == "2 - z + 5z^3"
        assert poly_in_z_str({}) == "0"
