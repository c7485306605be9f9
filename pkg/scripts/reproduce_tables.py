#!/usr/bin/env python3
"""Recompute the built-in tables and the polytope 1942 pipeline, flagging any row that drifts.

    python scripts/reproduce_tables.py [--workers N] [--skip-toric]
"""

import argparse
import os
import sys

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from blocks.descriptor import BlockDescriptor, evaluate_block
from blocks.fano_table import (block_examples_table, check_nodal_cubics, fano_rank1_table,
                               nodal_cubic_table, reproduce_fano_rank1)
from cli.report import InvariantReport, render_table
from toric.fan import fan_invariants, resolution_block_descriptor, resolution_classes, resolution_for_choice
from toric.polytope import LatticePolytope, polytope_profile
from utils.errors import AcylError
from utils.logs import configure_logging
from utils.settings import get_settings


def check_fano_rank1(workers):
    print("📊 Rank-1 Fano blocks...")
    expected = fano_rank1_table()
    actual = reproduce_fano_rank1(workers)
    print(render_table(actual))
    failures = 0
    for want, got in zip(expected.itertuples(index=False), actual.itertuples(index=False)):
        if (want.b3_Z, want.div_c2) != (got.b3_Z, got.div_c2):
            print(f"❌ {want.name}: expected ({want.b3_Z}, {want.div_c2}), got ({got.b3_Z}, {got.div_c2})")
            failures += 1
    return failures


def check_nodal_cubic_rows():
    print("📊 Nodal cubic semi-Fanos...")
    print(render_table(nodal_cubic_table()))
    problems = check_nodal_cubics()
    for p in problems:
        print(f"❌ {p}")
    return len(problems)


def check_block_examples(settings):
    print("📊 Worked building blocks...")
    failures = 0
    for row in block_examples_table().itertuples(index=False):
        path = settings.data_path(row.descriptor)
        if not path.exists():
            print(f"⏭️  {row.descriptor}: not found, skipped")
            continue
        try:
            report = InvariantReport.from_evaluation(evaluate_block(BlockDescriptor.from_file(path)))
            report.validate()
        except AcylError as e:
            print(f"❌ {row.descriptor}: {e}")
            failures += 1
            continue
        got = (report.degree, report.h2_Z, report.rank_K, report.b3_Z,
               ", ".join(str(d) for d in report.div_c2), report.e)
        want = (row.minus_K3, row.h2_Z, row.rank_K, row.b3_Z, row.div_c2, row.e)
        if got != want:
            print(f"❌ {row.descriptor}: expected {want}, got {got}")
            failures += 1
        else:
            print(f"✅ {row.descriptor}: H²(Z) = Z^{report.h2_Z}, H³(Z) = Z^{report.b3_Z}, "
                  f"div c2 = {got[4]}, e = {report.e}")
    return failures


def check_polytope_1942(settings, workers):
    print("🔷 Polytope 1942...")
    P = LatticePolytope.from_file(settings.data_path("p1942.txt"))
    profile = polytope_profile(P)
    print(f"  e = {profile.e}, ρ(X) = {profile.rho_X}, σ = {profile.sigma}, -K³ = {profile.degree}")
    classes = resolution_classes(P, workers=workers)
    print(f"  {classes.total} small resolutions, {classes.projective_count} projective, "
          f"{classes.class_count} classes")

    failures = 0
    res = resolution_for_choice(P, "0" * profile.e)
    invariants = fan_invariants(res, P)
    if not invariants.rigid:
        print("❌ resolution is not rigid")
        failures += 1
    for split, expected_b3 in ((False, 24), (True, 0)):
        block = resolution_block_descriptor(res, name="p1942", split_boundary=split,
                                            polarising_spec="E8(-1)+<8>+<-16>")
        report = InvariantReport.from_evaluation(evaluate_block(block))
        status = "✅" if report.b3_Z == expected_b3 else "❌"
        failures += status == "❌"
        print(f"  {status} {'split' if split else 'generic'} pencil: H²(Z) = Z^{report.h2_Z}, "
              f"H³(Z) = Z^{report.b3_Z}, rank K = {report.rank_K}, e = {report.e}")
    return failures


def main():
    parser = argparse.ArgumentParser(description="Reproduce the built-in invariant tables")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--skip-toric", action="store_true", help="skip the polytope 1942 pipeline")
    args = parser.parse_args()

    settings = get_settings()
    configure_logging()
    workers = args.workers or settings.workers

    failures = check_fano_rank1(workers)
    failures += check_nodal_cubic_rows()
    failures += check_block_examples(settings)
    if not args.skip_toric:
        failures += check_polytope_1942(settings, workers)

    if failures:
        print(f"❌ {failures} mismatches")
        return 1
    print("✅ All tables reproduced")
    return 0


if __name__ == "__main__":
    sys.exit(main())
