#!/usr/bin/env python3
"""Command line front end.

    acyl lattice profile data/burkhardt.gram
    acyl lattice isometric a.gram b.gram --bound 4
    acyl block data/quartic_plane.json --json
    acyl block --table fano-rank1
    acyl toric resolutions data/p1942.txt --classes

Exit status is 0 on success, 1 for bad input and 2 when the mathematics is
inconsistent or a search is out of range.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional

from blocks.descriptor import BlockDescriptor, evaluate_block
from blocks.fano_table import check_nodal_cubics, nodal_cubic_table, reproduce_fano_rank1
from cli.report import InvariantReport, dump_json, render_table
from k3.polarisation import complement_profile, verify_polarising_decomposition
from lattice.gram import GramLattice, lattice_profile, orthogonal_complement, smith_normal_form
from lattice.search import find_isometry, represent
from toric.fan import fan_invariants, resolution_classes, resolution_for_choice
from toric.polytope import LatticePolytope, parse_polytopes, polytope_profile
from utils.errors import AcylError, MalformedInput
from utils.logs import configure_logging
from utils.settings import get_settings

logger = logging.getLogger(__name__)

TABLES = ("fano-rank1", "nodal-cubic")


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors count as bad input"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"Error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="acyl", description="Invariants of ACyl Calabi-Yau building blocks")
    parser.add_argument("--json", action="store_true", help="structured output with stable keys")
    parser.add_argument("--log-level", help="overrides ACYL_LOG_LEVEL")
    parser.add_argument("--workers", type=int, help="overrides ACYL_WORKERS")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    lattice = commands.add_parser("lattice", help="Gram matrix computations")
    lattice_cmds = lattice.add_subparsers(dest="action", required=True, parser_class=ArgumentParser)
    profile = lattice_cmds.add_parser("profile", help="rank, signature, parity and discriminant")
    profile.add_argument("files", nargs="+")
    snf = lattice_cmds.add_parser("snf", help="Smith normal form with transforms")
    snf.add_argument("file")
    complement = lattice_cmds.add_parser("complement", help="orthogonal complement of a sublattice")
    complement.add_argument("--ambient", required=True)
    complement.add_argument("--sub", required=True, help="basis rows in ambient coordinates")
    isometric = lattice_cmds.add_parser("isometric", help="bounded isometry search")
    isometric.add_argument("first")
    isometric.add_argument("second")
    isometric.add_argument("--bound", type=int)
    rep = lattice_cmds.add_parser("represent", help="vectors of a given norm in a box")
    rep.add_argument("file")
    rep.add_argument("--value", type=int, required=True)
    rep.add_argument("--bound", type=int)
    verify = lattice_cmds.add_parser("verify", help="compare N with a claimed decomposition")
    verify.add_argument("file")
    verify.add_argument("--spec", required=True, help="e.g. 'E6*(-3)+E8(-1)+U'")

    block = commands.add_parser("block", help="evaluate a block descriptor")
    block.add_argument("descriptor", nargs="?")
    block.add_argument("--table", choices=TABLES)

    toric = commands.add_parser("toric", help="reflexive polytopes and their small resolutions")
    toric_cmds = toric.add_subparsers(dest="action", required=True, parser_class=ArgumentParser)
    tprofile = toric_cmds.add_parser("profile", help="reflexivity, terminality, degree, defect")
    tprofile.add_argument("file")
    resolutions = toric_cmds.add_parser("resolutions", help="projective small resolutions")
    resolutions.add_argument("file")
    resolutions.add_argument("--classes", action="store_true")
    resolutions.add_argument("--certificates", action="store_true")
    invariants = toric_cmds.add_parser("fan-invariants", help="intersection numbers of one resolution")
    invariants.add_argument("file")
    invariants.add_argument("--choice", default="", help="diagonal bitstring, one bit per parallelogram")
    return parser


def _read_rows(path: str) -> List[List[int]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        tokens = line.split()
        if not tokens or tokens[0].startswith('#'):
            continue
        try:
            rows.append([int(t) for t in tokens])
        except ValueError as e:
            raise MalformedInput(f"{path}, line {lineno}: {e}")
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise MalformedInput(f"{path}: rows have different lengths")
    return rows


def _disc_text(factors) -> str:
    if not factors:
        return "trivial"
    parts = []
    for d in sorted(set(factors)):
        k = list(factors).count(d)
        parts.append(f"{d}^{k}" if k > 1 else str(d))
    return " x ".join(parts)


def _matrix_text(rows) -> str:
    return "\n".join("  " + " ".join(f"{x:>4}" for x in row) for row in rows) or "  (empty)"


# ----------------------------------------------------------------------------
# lattice
# ----------------------------------------------------------------------------

def cmd_lattice(args) -> Any:
    settings = get_settings()
    if args.action == "profile":
        result = {}
        for path in args.files:
            result[Path(path).name] = lattice_profile(GramLattice.from_file(path))
        if args.json:
            return result
        lines = []
        for name, p in result.items():
            pos, zero, neg = p.signature
            signature = f"({pos},{neg})" + (f" with {zero}-dimensional radical" if zero else "")
            lines.append(f"📐 {name}: rank {p.rank}, sig {signature}, det {p.det}, "
                         f"{'even' if p.even else 'odd'}, disc {_disc_text(p.disc_invariant_factors)}")
            if p.p_elementary:
                lines.append(f"  {p.p_elementary[0]}-elementary, ℓ = {p.p_elementary[1]}")
        return "\n".join(lines)

    if args.action == "snf":
        G = GramLattice.from_file(args.file)
        D, U, V = smith_normal_form(G.rows(), G.rank)
        if args.json:
            return {'D': D, 'U': U, 'V': V}
        return "\n".join(["D =", _matrix_text(D), "U =", _matrix_text(U), "V =", _matrix_text(V)])

    if args.action == "complement":
        ambient = GramLattice.from_file(args.ambient)
        basis, gram = orthogonal_complement(ambient, _read_rows(args.sub))
        if args.json:
            return {'basis': basis, 'gram': gram, 'profile': lattice_profile(gram)}
        p = lattice_profile(gram)
        return "\n".join([f"📐 complement of rank {gram.rank}, disc {_disc_text(p.disc_invariant_factors)}",
                          "basis:", _matrix_text(basis), "gram:", _matrix_text(gram.rows())])

    if args.action == "isometric":
        bound = args.bound if args.bound is not None else settings.isometry_bound
        found = find_isometry(GramLattice.from_file(args.first), GramLattice.from_file(args.second), bound)
        if args.json:
            return found.to_dict()
        if not found.isometric:
            return f"❌ no isometry with entries bounded by {bound}"
        lines = ["✅ isometric, Uᵀ·G1·U = G2 with U =", _matrix_text(found.transform)]
        if not found.within_bound:
            lines.append(f"⚠️  found through reduced forms; U has entries beyond {bound}")
        return "\n".join(lines)

    if args.action == "represent":
        bound = args.bound if args.bound is not None else settings.represent_bound
        vectors = represent(GramLattice.from_file(args.file), args.value, bound)
        if args.json:
            return {'value': args.value, 'bound': bound, 'vectors': vectors}
        header = f"{len(vectors)} vectors of norm {args.value} with entries in [-{bound}, {bound}]"
        return "\n".join([header] + ["  " + " ".join(str(x) for x in v) for v in vectors])

    if args.action == "verify":
        N = GramLattice.from_file(args.file)
        report = verify_polarising_decomposition(N, args.spec)
        T = complement_profile(N)
        if args.json:
            return {'verification': report, 'complement': T}
        mark = "❌" if report.differences else "✅"
        lines = [f"{mark} N against {args.spec}: {report.verdict}"]
        if report.differences:
            lines.append(f"  differs in {', '.join(report.differences)}")
        lines.append(f"  complement T: rank {T.rank}, sig ({T.signature[0]},{T.signature[2]}), "
                     f"disc {_disc_text(T.disc_invariant_factors)}")
        return "\n".join(lines)

    raise MalformedInput(f"unknown lattice action {args.action}")


# ----------------------------------------------------------------------------
# block
# ----------------------------------------------------------------------------

def cmd_block(args) -> Any:
    if args.table and args.descriptor:
        raise MalformedInput("give a descriptor or --table, not both")
    if args.table == "fano-rank1":
        df = reproduce_fano_rank1(args.workers)
        return df if args.json else "📊 Rank-1 Fano blocks\n" + render_table(df)
    if args.table == "nodal-cubic":
        df = nodal_cubic_table()
        problems = check_nodal_cubics(df)
        if args.json:
            return {'rows': df, 'problems': problems}
        status = "✅ all rows consistent" if not problems else "\n".join(f"❌ {p}" for p in problems)
        return "📊 Nodal cubic semi-Fanos\n" + render_table(df) + "\n" + status
    if not args.descriptor:
        raise MalformedInput("give a descriptor file or --table")

    report = InvariantReport.from_evaluation(evaluate_block(BlockDescriptor.from_file(args.descriptor)))
    report.validate()
    return report.to_dict() if args.json else report.to_text()


# ----------------------------------------------------------------------------
# toric
# ----------------------------------------------------------------------------

def toric_record(action: str, P: LatticePolytope, options: Dict[str, Any]) -> Dict[str, Any]:
    record: Dict[str, Any] = {'name': P.name}
    if action == "profile":
        record['profile'] = polytope_profile(P).to_dict()
    elif action == "resolutions":
        classes = resolution_classes(P, workers=options.get('workers') or 1)
        record['total'] = classes.total
        record['projective'] = classes.projective_count
        if options.get('classes'):
            record['classes'] = classes.class_count
            record['orbits'] = classes.orbit_count
            record['group_order'] = classes.group_order
        if options.get('certificates'):
            record['certificates'] = {k: list(v) for k, v in sorted(classes.certificates.items())}
    elif action == "fan-invariants":
        res = resolution_for_choice(P, options.get('choice', ""))
        record['choice'] = res.choice
        record['invariants'] = fan_invariants(res, P).to_dict()
    else:
        raise MalformedInput(f"unknown toric action {action}")
    return record


def _batch_record(job) -> Dict[str, Any]:
    action, P, options = job
    try:
        return toric_record(action, P, options)
    except AcylError as e:
        logger.info("%s: %s", P.name, e)
        return {'name': P.name, 'error': str(e), 'kind': type(e).__name__}


def _toric_text(action: str, record: Dict[str, Any]) -> str:
    if 'error' in record:
        return f"❌ {record['name']}: {record['kind']}: {record['error']}"
    name = record['name'] or "polytope"
    if action == "profile":
        p = record['profile']
        if not p['reflexive']:
            return (f"🔷 {name}: not reflexive, {p['vertices']} vertices, {p['facets']} facets, "
                    f"{p['lattice_points']} lattice points")
        flags = [f for f in ("terminal", "semismall", "self_dual") if p[f]]
        kinds = ", ".join(f"{v} {k}" for k, v in p['facet_kinds'].items())
        return "\n".join([
            f"🔷 {name}: reflexive" + (", " + ", ".join(flags) if flags else ""),
            f"  vertices {p['vertices']}, facets {p['facets']} ({kinds}), lattice points {p['lattice_points']}",
            f"  e = {p['e']}, ρ(Y) = {p['rho_resolution']}, ρ(X) = {p['rho_X']}, σ = {p['sigma']}",
            f"  -K³ = {p['degree']}, genus {p['genus']}",
        ])
    if action == "resolutions":
        lines = [f"🔷 {name}: {record['total']} small resolutions, {record['projective']} projective"]
        if 'classes' in record:
            lines.append(f"  {record['classes']} classes of projective resolutions "
                         f"({record['orbits']} orbits, |Aut| = {record['group_order']})")
        for choice, heights in record.get('certificates', {}).items():
            lines.append(f"  {choice or '-'}: heights {' '.join(str(h) for h in heights)}")
        return "\n".join(lines)
    inv = record['invariants']
    lines = [f"🔷 {name}, diagonals {record['choice'] or '-'}: "
             f"{'smooth' if inv['smooth'] else 'not smooth'}"]
    if inv['smooth']:
        lines += [
            f"  -K³ = {inv['antiK_cubed']}, ρ = {inv['picard_rank']}, Demazure roots {inv['demazure_roots']}, "
            f"h1(T) = {inv['h1']} ({'rigid' if inv['rigid'] else 'not rigid'})",
            f"  c2·D:       {' '.join(str(x) for x in inv['c2'])}",
            f"  (c2+c1²)·D: {' '.join(str(x) for x in inv['c2c1sq'])}",
            "  boundary K3 Gram:",
            _matrix_text(inv['boundary_k3_gram']),
        ]
        lines += [f"  ✅ {c}" for c in inv['checks']]
    return "\n".join(lines)


def cmd_toric(args) -> Any:
    workers = args.workers or get_settings().workers
    polytopes = parse_polytopes(Path(args.file).read_text(), Path(args.file).stem)
    options = {
        'classes': getattr(args, 'classes', False),
        'certificates': getattr(args, 'certificates', False),
        'choice': getattr(args, 'choice', ""),
    }
    if len(polytopes) == 1:
        options['workers'] = workers
        record = toric_record(args.action, polytopes[0], options)
        return record if args.json else _toric_text(args.action, record)

    jobs = [(args.action, P, options) for P in polytopes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_batch_record, jobs))
    else:
        records = [_batch_record(job) for job in jobs]
    failed = sum(1 for r in records if 'error' in r)
    logger.info("batch of %d polytopes, %d failed", len(records), failed)
    if args.json:
        return records
    return "\n".join(_toric_text(args.action, r) for r in records)


COMMANDS = {
    "lattice": cmd_lattice,
    "block": cmd_block,
    "toric": cmd_toric,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        if args.workers is not None and args.workers < 1:
            raise MalformedInput(f"--workers must be >= 1, got {args.workers}")
        output = COMMANDS[args.command](args)
    except AcylError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    print(dump_json(output) if args.json else output)
    return 0


if __name__ == '__main__':
    sys.exit(main())
