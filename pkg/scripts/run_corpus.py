#!/usr/bin/env python3
"""Run the full pipeline over the standard curve corpus and report
per-curve invariants (module counts, Euler numbers, superduality,
reference comparisons where stored data exists).

Usage:
    python3 scripts/run_corpus.py [--quick] [--jobs N] [--out report.json]

--quick restricts to the curves that finish in seconds each; the full
corpus includes the two multiplicity-6 long runs (~10-30 min each on one
core).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from jacfac.fields import RationalField
from jacfac.modules import enumerate_standard_modules
from jacfac.ring import parse_curve, valuation_basis
from jacfac.superpoly import (
    a_degree,
    compare_refdata,
    curve_fixture_id,
    euler_number_of,
    fixture_slices,
    format_poly,
    load_fixture,
    resolve_fixtures_dir,
    superduality_check,
    superpolynomial,
)

QUICK_CORPUS = [
    "x=z^2, y=z^3",
    "x=z^4, y=z^6+z^7",
    "x=z^4, y=z^6+z^9",
    "x=z^4, y=z^6+z^13",
    "x=z^4, y=z^10+z^11",
    "x=z^4, y=z^14+z^17",
    "x=z^6, y=z^8+z^9",
]

FULL_CORPUS = QUICK_CORPUS + [
    "x=z^6, y=z^9+z^10",
    "x=z^6, y=z^9+z^13",
]


def run_curve(curve: str, jobs: int, fixtures: Path) -> dict:
    t0 = time.time()
    x, y = parse_curve(curve)
    ring = valuation_basis(x, y, RationalField())
    sg = ring.semigroup
    H = superpolynomial(ring, jobs=jobs)
    dual_ok, dual_exp = superduality_check(H)
    record = {
        "curve": curve,
        "generators": list(sg.minimal_generators()),
        "delta": sg.delta,
        "conductor": sg.conductor,
        "modules": len(enumerate_standard_modules(sg)),
        "euler": euler_number_of(H),
        "a_degree": a_degree(H),
        "terms": len(H.poly),
        "superduality": dual_ok,
        "superduality_exponents": list(dual_exp) if dual_exp else None,
        "comparisons": {},
        "seconds": None,
    }
    cid = curve_fixture_id(sg)
    for slice_name in fixture_slices(fixtures, cid):
        ref = load_fixture(fixtures, cid, slice_name)
        diffs = compare_refdata(H, ref, slice_name=slice_name)
        record["comparisons"][slice_name] = (
            "exact" if not diffs else f"{len(diffs)} mismatches"
        )
    record["seconds"] = round(time.time() - t0, 1)
    return record


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="small curves only")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", help="write the JSON report here as well")
    args = ap.parse_args()

    fixtures = resolve_fixtures_dir()
    corpus = QUICK_CORPUS if args.quick else FULL_CORPUS
    report = []
    for curve in corpus:
        rec = run_curve(curve, args.jobs, fixtures)
        report.append(rec)
        comps = ", ".join(f"{k}={v}" for k, v in rec["comparisons"].items()) or "-"
        print(
            f"{rec['curve']:24s} delta={rec['delta']:3d} "
            f"modules={rec['modules']:4d} euler={rec['euler']:4d} "
            f"duality={'ok' if rec['superduality'] else 'FAIL'} "
            f"refs[{comps}] {rec['seconds']}s",
            flush=True,
        )
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    bad = [r for r in report if not r["superduality"]
           or any("mismatch" in v for v in r["comparisons"].values())]
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
