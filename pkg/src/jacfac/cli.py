"""Command-line surface: configuration, table emitters, and the batch
pipeline driver.

Subcommands map one-to-one onto pipeline stages::

    semigroup      numerical invariants of the value semigroup (JSON)
    modules        enumerate standard modules, or flags with --m
    dims           solve cells: (D-set, added gaps, dim) table
    superpoly      assemble the full superpolynomial H(q, t, a)
    betti          H(q=1, t, a=0)
    euler          the integer H(q=1, t=1, a=0)
    oracle         brute-force finite-field counts vs interpolated cells
    compare        computed slices vs stored reference polynomials
    nonadmissible  valuation sets no module realizes
    nonaffine      cells with non-trivial count polynomials

Exit status: 0 on success, 1 on any computational or usage error, 2 when
a comparison (``compare``/``oracle``) finds a mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .cells import analyze_curve, cell_report, solve_cell
from .counting import (
    FIELD_SCHEDULE,
    CountingError,
    brute_count,
    count_cell,
    count_cells,
    count_poly_str,
    euler_number,
)
from .fields import FiniteField, RationalField, field_of_size
from .modules import DFlag, enumerate_dflags, enumerate_standard_modules, primitive_dset
from .ring import good_reduction, parse_curve, valuation_basis
from .semigroup import (
    exponents_to_newton,
    generators_to_exponents,
    newton_to_cable,
    semigroup_generate,
)
from .superpoly import (
    AssemblyError,
    assemble,
    betti_poly,
    compare_refdata,
    curve_fixture_id,
    diff_report,
    euler_number_of,
    fixture_slices,
    format_poly,
    load_fixture,
    poly_in_z_str,
    resolve_fixtures_dir,
    superpolynomial,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2


class UsageError(ValueError):
    """Malformed command line (bad flag combination or value)."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by all subcommands.

    Exactly one of ``curve`` / ``exponents`` / ``gamma`` selects the ring;
    ``m`` is the subcommand's flag-length parameter (never negative),
    ``primes`` overrides the counting field schedule, ``trunc`` the series
    truncation, ``budget`` the residual-variable cap.
    """

    curve: str | None = None
    exponents: tuple[int, ...] | None = None
    gamma: tuple[int, ...] | None = None
    m: int | None = None
    primes: tuple[int, ...] | None = None
    trunc: int | None = None
    jobs: int = 1
    format: str | None = None
    budget: int = 12
    fixtures_dir: str | None = None
    checkpoint: str | None = None

    def __post_init__(self) -> None:
        modes = sum(x is not None for x in (self.curve, self.exponents, self.gamma))
        if modes != 1:
            raise UsageError(
                "exactly one of --curve / --exponents / --gamma is required"
            )
        if self.m is not None and self.m < 0:
            raise UsageError("--m must be >= 0")
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if self.budget < 1:
            raise UsageError("--budget must be >= 1")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty integer list")
    return values


def curve_polys(cfg: RunConfig) -> tuple[dict[int, int], dict[int, int]]:
    """The (x, y) parametrization polynomials selected by the config.

    ``--gamma`` infers the canonical parametrization from the
    characteristic exponents of the semigroup: x = z^(e0),
    y = z^(e1) + ... + z^(el).  The analytic type is not determined by the
    semigroup alone, so a warning is printed.
    """
    if cfg.curve is not None:
        return parse_curve(cfg.curve)
    if cfg.exponents is not None:
        exps = cfg.exponents
        exponents_to_newton(exps)  # validates shape
        x = {exps[0]: 1}
        y = {e: 1 for e in exps[1:]}
        return x, y
    assert cfg.gamma is not None
    sg = semigroup_generate(cfg.gamma)
    exps = generators_to_exponents(sg)
    x = {exps[0]: 1}
    y = {e: 1 for e in exps[1:]}
    print(
        "warning: analytic type inferred from the semigroup alone: "
        f"using x={poly_in_z_str(x)}, y={poly_in_z_str(y)}",
        file=sys.stderr,
    )
    return x, y


def build_ring(cfg: RunConfig, field=None):
    x, y = curve_polys(cfg)
    return valuation_basis(x, y, field or RationalField(), trunc=cfg.trunc)


def _schedule(cfg: RunConfig):
    return cfg.primes if cfg.primes else FIELD_SCHEDULE


def _emit(lines: list[str]) -> None:
    sys.stdout.write("\n".join(lines) + "\n")


def _ints(values) -> str:
    return ",".join(str(v) for v in values) if values else "-"


def _tsv(header: list[str], rows: list[list[str]]) -> list[str]:
    return ["\t".join(header)] + ["\t".join(row) for row in rows]


# -- subcommands ---------------------------------------------------------------


def cmd_semigroup(cfg: RunConfig) -> int:
    ring = build_ring(cfg)
    sg = ring.semigroup
    exps = generators_to_exponents(sg)
    cable = newton_to_cable(exponents_to_newton(exps))
    record = {
        "generators": list(sg.minimal_generators()),
        "gaps": list(sg.gaps),
        "delta": sg.delta,
        "conductor": sg.conductor,
        "cable": [list(pair) for pair in cable.pairs()],
    }
    if cfg.format == "tsv":
        rows = [[key, _ints(val) if isinstance(val, list) else str(val)]
                for key, val in record.items()
                if key != "cable"]
        rows.append(["cable", ";".join(_ints(p) for p in record["cable"])])
        _emit(_tsv(["field", "value"], rows))
    else:
        _emit([json.dumps(record, sort_keys=True)])
    return EXIT_OK


def cmd_modules(cfg: RunConfig) -> int:
    ring = build_ring(cfg)
    sg = ring.semigroup
    mods = enumerate_standard_modules(sg)
    if cfg.m is None:
        if cfg.format == "json":
            _emit([json.dumps([
                {"d_set": list(m.d_set), "primitive": list(primitive_dset(m)),
                 "size": len(m.d_set)}
                for m in mods
            ])])
        else:
            _emit(_tsv(
                ["d_set", "primitive", "size"],
                [[_ints(m.d_set), _ints(primitive_dset(m)), str(len(m.d_set))]
                 for m in mods],
            ))
        return EXIT_OK
    flags = enumerate_dflags(sg, mods, cfg.m)
    if cfg.format == "json":
        _emit([json.dumps([
            {"d0_primitive": list(primitive_dset(f.base)),
             "gaps": list(f.added_gaps), "m": len(f.added_gaps)}
            for f in flags
        ])])
    else:
        _emit(_tsv(
            ["d0_primitive", "gaps", "m"],
            [[_ints(primitive_dset(f.base)), _ints(f.added_gaps),
              str(len(f.added_gaps))] for f in flags],
        ))
    return EXIT_OK


def cmd_dims(cfg: RunConfig) -> int:
    """Solve every flag of length exactly --m; table rows skip
    non-admissible (empty) cells, JSON reports everything."""
    ring = build_ring(cfg)
    sg = ring.semigroup
    m = cfg.m or 0
    mods = enumerate_standard_modules(sg)
    flags = enumerate_dflags(sg, mods, m)
    cells = [
        solve_cell(flag, ring, residual_cap=cfg.budget) for flag in flags
    ]
    if cfg.format == "json":
        _emit([json.dumps([cell_report(c) for c in cells])])
        return EXIT_OK
    rows = []
    for cell in cells:
        if cell.status == "empty":
            continue
        dim = str(cell.dim) if cell.status == "affine" else "nonaffine"
        rows.append([_ints(cell.flag.base.d_set), _ints(cell.flag.added_gaps), dim])
    _emit(_tsv(["d_set", "gaps", "dim"], rows))
    return EXIT_OK


def _superpoly(cfg: RunConfig):
    ring = build_ring(cfg)
    return superpolynomial(
        ring,
        cfg.m,
        jobs=cfg.jobs,
        residual_cap=cfg.budget,
        checkpoint=cfg.checkpoint,
        schedule=_schedule(cfg),
    )


def _emit_tripoly(H, cfg: RunConfig, meta: dict | None = None) -> None:
    if cfg.format == "json":
        record = dict(meta or {})
        record["terms"] = [
            [i, j, k, H.poly[(i, j, k)]]
            for (i, j, k) in sorted(H.poly, key=lambda key: (key[2], key[1], key[0]))
        ]
        _emit([json.dumps(record, sort_keys=True)])
    elif cfg.format == "tsv":
        rows = [
            [str(i), str(j), str(k), str(H.poly[(i, j, k)])]
            for (i, j, k) in sorted(H.poly, key=lambda key: (key[2], key[1], key[0]))
        ]
        _emit(_tsv(["q", "t", "a", "coeff"], rows))
    else:
        _emit([format_poly(H)])


def cmd_superpoly(cfg: RunConfig) -> int:
    H = _superpoly(cfg)
    meta = {
        "curve": H.curve,
        "delta": H.delta,
        "m_max": H.m_max,
        "truncated": H.truncated,
    }
    _emit_tripoly(H, cfg, meta)
    return EXIT_OK


def _m0_counts(cfg: RunConfig):
    ring = build_ring(cfg)
    cells = analyze_curve(
        ring,
        m_max=0,
        jobs=cfg.jobs,
        residual_cap=cfg.budget,
        checkpoint=cfg.checkpoint,
    )
    return ring, cells, count_cells(cells, schedule=_schedule(cfg))


def cmd_betti(cfg: RunConfig) -> int:
    ring, _cells, counts = _m0_counts(cfg)
    H = assemble(
        counts,
        delta=ring.semigroup.delta,
        multiplicity=ring.multiplicity(),
        m_max=0,
    )
    b = betti_poly(H)
    if cfg.format == "json":
        _emit([json.dumps({"terms": [[j, b[j]] for j in sorted(b)]})])
    elif cfg.format == "tsv":
        _emit(_tsv(["t", "coeff"], [[str(j), str(b[j])] for j in sorted(b)]))
    else:
        _emit([format_poly({(0, j, 0): c for j, c in b.items()})])
    return EXIT_OK


def cmd_euler(cfg: RunConfig) -> int:
    _ring, _cells, counts = _m0_counts(cfg)
    _emit([str(euler_number(counts))])
    return EXIT_OK


def cmd_nonadmissible(cfg: RunConfig) -> int:
    ring = build_ring(cfg)
    cells = analyze_curve(
        ring, m_max=0, jobs=cfg.jobs, residual_cap=cfg.budget,
        checkpoint=cfg.checkpoint,
    )
    bad = sorted(
        (c.flag.base.d_set for c in cells if c.status == "empty"),
        key=lambda d: (len(d), d),
    )
    if cfg.format == "json":
        _emit([json.dumps([list(d) for d in bad])])
    else:
        _emit(_tsv(["d_set"], [[_ints(d)] for d in bad]))
    return EXIT_OK


def cmd_nonaffine(cfg: RunConfig) -> int:
    """Cells (all lengths <= --m) whose count polynomial is not a pure
    power of the field size."""
    ring = build_ring(cfg)
    cells = analyze_curve(
        ring, m_max=cfg.m or 0, jobs=cfg.jobs, residual_cap=cfg.budget,
        checkpoint=cfg.checkpoint,
    )
    rows = []
    records = []
    for cell in cells:
        if cell.status != "nonaffine":
            continue
        cc = count_cell(cell, schedule=_schedule(cfg))
        contrib = sum(cc.poly.values())
        rows.append([
            str(len(cell.flag.added_gaps)),
            _ints(primitive_dset(cell.flag.base)),
            _ints(cell.flag.added_gaps),
            count_poly_str(cc.poly),
            str(contrib),
        ])
        records.append({
            "m": len(cell.flag.added_gaps),
            "d0_primitive": list(primitive_dset(cell.flag.base)),
            "gaps": list(cell.flag.added_gaps),
            "count_poly": {str(d): c for d, c in sorted(cc.poly.items())},
            "euler_contrib": contrib,
        })
    if cfg.format == "json":
        _emit([json.dumps(records)])
    else:
        _emit(_tsv(
            ["m", "d0_primitive", "gaps", "count_poly", "euler_contrib"], rows
        ))
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    """Brute-force counts over a prime-power field against the
    interpolated count polynomials, for all flags of length <= --m."""
    if not cfg.primes:
        raise UsageError("oracle requires --primes with at least one field size")
    size = cfg.primes[0]
    K = field_of_size(size)
    ring_q = build_ring(cfg)
    if not good_reduction(ring_q, K.char, K.ell):
        raise CountingError(
            f"bad reduction at {K.char}: the oracle field F_{size} is unusable"
        )
    cells = analyze_curve(
        ring_q, m_max=cfg.m if cfg.m is not None else 1,
        jobs=cfg.jobs, residual_cap=cfg.budget, checkpoint=cfg.checkpoint,
    )
    by_key = {}
    for cell in cells:
        cc = count_cell(cell, schedule=_schedule(cfg))
        by_key[(cell.flag.base.d_set, cell.flag.added_gaps)] = cc

    ring_f = build_ring(cfg, field=K)
    sg = ring_f.semigroup
    mods = enumerate_standard_modules(sg)
    mismatches = 0
    rows = []
    for m in range((cfg.m if cfg.m is not None else 1) + 1):
        for flag in enumerate_dflags(sg, mods, m):
            cc = by_key[(flag.base.d_set, flag.added_gaps)]
            value = sum(c * size**d for d, c in cc.poly.items())
            brute = brute_count(ring_f, flag)
            ok = value == brute
            mismatches += 0 if ok else 1
            rows.append([
                str(m),
                _ints(primitive_dset(flag.base)),
                _ints(flag.added_gaps),
                str(brute),
                str(value),
                "ok" if ok else "MISMATCH",
            ])
    header = ["m", "d0_primitive", "gaps", f"brute_F{size}", "cell_poly_value",
              "status"]
    if cfg.format == "json":
        _emit([json.dumps({
            "field": size,
            "budget": cfg.budget,
            "rows": [dict(zip(header, row)) for row in rows],
            "mismatches": mismatches,
        }, sort_keys=True)])
    else:
        _emit(_tsv(header, rows) + [f"# field F_{size}, budget {cfg.budget}"])
    return EXIT_MISMATCH if mismatches else EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    """Computed slices against every stored reference polynomial for the
    curve; exits 2 iff any coefficient differs."""
    ring = build_ring(cfg)
    cid = curve_fixture_id(ring.semigroup)
    fdir = resolve_fixtures_dir(cfg.fixtures_dir)
    slices = fixture_slices(fdir, cid)
    if not slices:
        raise UsageError(f"no reference polynomials for {cid} under {fdir}")
    H = superpolynomial(
        ring, cfg.m, jobs=cfg.jobs, residual_cap=cfg.budget,
        checkpoint=cfg.checkpoint, schedule=_schedule(cfg),
    )
    failed = False
    lines = []
    for slice_name in slices:
        ref = load_fixture(fdir, cid, slice_name)
        diffs = compare_refdata(H, ref, slice_name=slice_name)
        if diffs:
            failed = True
            lines.append(f"{cid}/{slice_name}: {len(diffs)} mismatching terms")
            lines.append(diff_report(diffs))
        else:
            lines.append(f"{cid}/{slice_name}: exact match")
    _emit(lines)
    return EXIT_MISMATCH if failed else EXIT_OK


COMMANDS = {
    "semigroup": cmd_semigroup,
    "modules": cmd_modules,
    "dims": cmd_dims,
    "superpoly": cmd_superpoly,
    "betti": cmd_betti,
    "euler": cmd_euler,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "nonadmissible": cmd_nonadmissible,
    "nonaffine": cmd_nonaffine,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1, not argparse's default 2
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    group = common.add_argument_group("curve selection (exactly one)")
    group.add_argument("--curve", help='parametrization, e.g. "x=z^4, y=z^6+z^7"')
    group.add_argument(
        "--exponents", type=_int_list,
        help="characteristic exponents e0,e1,...: x=z^e0, y=z^e1+...",
    )
    group.add_argument(
        "--gamma", type=_int_list,
        help="semigroup generators; canonical parametrization inferred (warns)",
    )
    common.add_argument("--m", type=int, help="flag length (role varies by subcommand)")
    common.add_argument(
        "--primes", type=_int_list,
        help="field sizes: counting schedule override / oracle field",
    )
    common.add_argument("--trunc", type=int, help="series truncation override")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument(
        "--format", choices=["json", "tsv", "poly"],
        help="output format (default varies by subcommand)",
    )
    common.add_argument(
        "--budget", type=int, default=12,
        help="residual-variable cap for elimination/counting (default 12)",
    )
    common.add_argument("--fixtures-dir", help="reference polynomial directory")
    common.add_argument("--checkpoint", help="JSONL path for resumable analysis")

    parser = _Parser(
        prog="jacfac",
        description=(
            "Exact flagged-Jacobian-factor computations for unibranch plane "
            "curve singularities."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        doc = (fn.__doc__ or "").strip().splitlines()
        p = sub.add_parser(name, parents=[common], help=doc[0] if doc else None)
        p.set_defaults(func=fn)
    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = RunConfig(
            curve=ns.curve,
            exponents=ns.exponents,
            gamma=ns.gamma,
            m=ns.m,
            primes=ns.primes,
            trunc=ns.trunc,
            jobs=ns.jobs,
            format=ns.format,
            budget=ns.budget,
            fixtures_dir=ns.fixtures_dir,
            checkpoint=ns.checkpoint,
        )
        return ns.func(cfg)
    except UsageError as exc:
        print(f"jacfac: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, AssemblyError, CountingError, OSError) as exc:
        print(f"jacfac: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
