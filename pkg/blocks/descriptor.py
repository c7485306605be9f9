#!/usr/bin/env python3
"""Block descriptors: the JSON description of a semi-Fano Y with an anticanonical pencil,
and everything computed from it.

A descriptor records the Picard Gram q(D1, D2) = -K·D1·D2, the anticanonical class,
the pairings (c2(Y) + c1(Y)²)·Di and the components of the base curve of the pencil.
"""

import json
import logging
import warnings
from dataclasses import dataclass, field
from functools import reduce
from math import gcd
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from blocks.invariants import (AcylProfile, BlockCohomology, acyl_profile,
                               anticanonical_c2_pairing, betti3_semifano, block_cohomology,
                               div_c2_bounds, divisibility_modulo, fibre_coefficients,
                               genus_degree)
from k3.polarisation import theorem_quartic_checks, verify_polarising_decomposition
from lattice.gram import GramLattice, matmul
from lattice.standard import parse_lattice_spec
from utils.errors import (InconsistentC2, InconsistentReport, InputError, MalformedInput,
                          RankNullityViolation, SchemaError, TorsionUnknown)

logger = logging.getLogger(__name__)

TORSION_BANNER = "TORSION-UNKNOWN"

REQUIRED_KEYS = ("picard_gram", "anticanonical", "c2c1sq", "e", "base_curves")
OPTIONAL_KEYS = ("name", "b3_Y", "index", "torsion_free_h3", "smoothing", "polarising_gram",
                 "polarising_spec", "rank_K", "flops", "div_c2_data", "quartic", "c2_modulo")


@dataclass(frozen=True)
class BaseCurve:
    """One component of the base curve of the pencil"""

    genus: int
    step_K3: Optional[int] = None


@dataclass
class BlockDescriptor:
    """Numerical description of a block Z = Bl_C Y"""

    picard_gram: GramLattice
    anticanonical: Tuple[int, ...]
    c2c1sq: Tuple[Optional[int], ...]
    b3_Y: int
    e: int
    base_curves: List[BaseCurve]
    index: int = 1
    name: str = ""
    torsion_free_h3: bool = True
    smoothing: Optional[Dict[str, int]] = None
    polarising_gram: Optional[GramLattice] = None
    polarising_spec: Optional[str] = None
    rank_K: Optional[int] = None
    flops: List[Tuple[Optional[int], ...]] = field(default_factory=list)
    div_c2_data: List[int] = field(default_factory=list)
    quartic: Optional[Dict[str, Any]] = None
    c2_modulo: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def degree(self) -> int:
        return self.picard_gram.norm(self.anticanonical)

    @property
    def genus(self) -> int:
        return genus_degree(self.degree).g

    @property
    def k(self) -> int:
        return len(self.base_curves)

    @property
    def steps(self) -> List[Optional[int]]:
        return [c.step_K3 for c in self.base_curves[:-1]]

    @property
    def N(self) -> GramLattice:
        return self.polarising_gram if self.polarising_gram is not None else self.picard_gram

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BlockDescriptor":
        return _parse_descriptor(data)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "BlockDescriptor":
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise MalformedInput(f"{path}: invalid JSON ({e.msg} at line {e.lineno})")
        block = _parse_descriptor(data)
        if not block.name:
            block.name = Path(path).stem
        return block

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'name': self.name,
            'picard_gram': self.picard_gram.rows(),
            'anticanonical': list(self.anticanonical),
            'c2c1sq': list(self.c2c1sq),
            'b3_Y': self.b3_Y,
            'e': self.e,
            'index': self.index,
            'base_curves': [{'genus': c.genus, 'step_K3': c.step_K3} for c in self.base_curves],
            'torsion_free_h3': self.torsion_free_h3,
        }
        if self.smoothing is not None:
            data['smoothing'] = dict(self.smoothing)
        if self.polarising_gram is not None:
            data['polarising_gram'] = self.polarising_gram.rows()
        if self.polarising_spec is not None:
            data['polarising_spec'] = self.polarising_spec
        if self.rank_K is not None:
            data['rank_K'] = self.rank_K
        if self.flops:
            data['flops'] = [list(f) for f in self.flops]
        if self.div_c2_data:
            data['div_c2_data'] = list(self.div_c2_data)
        if self.quartic is not None:
            data['quartic'] = dict(self.quartic)
        if self.c2_modulo:
            data['c2_modulo'] = [list(v) for v in self.c2_modulo]
        return data


# Schema helpers; every failure names the key path

def _int(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected an integer, got {value!r}", path)
    return value


def _nonneg(value, path) -> int:
    value = _int(value, path)
    if value < 0:
        raise SchemaError(f"must be >= 0, got {value}", path)
    return value


def _int_list(value, path, length: Optional[int] = None, nullable: bool = False) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected a list, got {type(value).__name__}", path)
    if length is not None and len(value) != length:
        raise SchemaError(f"expected {length} entries, got {len(value)}", path)
    return [None if (nullable and x is None) else _int(x, path + [i]) for i, x in enumerate(value)]


def _gram(value, path) -> GramLattice:
    if not isinstance(value, list):
        raise SchemaError("expected a list of rows", path)
    rows = [_int_list(row, path + [i], len(value)) for i, row in enumerate(value)]
    try:
        return GramLattice.from_rows(rows)
    except InputError as e:
        raise SchemaError(str(e), path)


def _parse_descriptor(data: Any) -> BlockDescriptor:
    if not isinstance(data, dict):
        raise SchemaError("descriptor must be a JSON object")
    for key in REQUIRED_KEYS:
        if key not in data:
            raise SchemaError("missing required key", [key])
    unknown = sorted(set(data) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS))
    if unknown:
        raise SchemaError("unknown key", [unknown[0]])

    gram = _gram(data['picard_gram'], ['picard_gram'])
    n = gram.rank
    A = tuple(_int_list(data['anticanonical'], ['anticanonical'], n))
    degree = gram.norm(A)
    if degree <= 0:
        raise SchemaError(f"anticanonical class must have positive square, got {degree}",
                          ['anticanonical'])
    genus_degree(degree)

    divisor = reduce(gcd, A, 0)
    index = _int(data.get('index', divisor), ['index'])
    if index < 1 or divisor != index:
        raise SchemaError(f"anticanonical class is {divisor} times a primitive class, "
                          f"declared index {index}", ['index'])

    c2c1sq = tuple(_int_list(data['c2c1sq'], ['c2c1sq'], n, nullable=True))
    e = _nonneg(data['e'], ['e'])

    curves_raw = data['base_curves']
    if not isinstance(curves_raw, list) or not curves_raw:
        raise SchemaError("expected a non-empty list of components", ['base_curves'])
    curves = []
    for i, item in enumerate(curves_raw):
        path = ['base_curves', i]
        if not isinstance(item, dict) or 'genus' not in item:
            raise SchemaError("expected an object with a genus", path)
        extra = sorted(set(item) - {'genus', 'step_K3'})
        if extra:
            raise SchemaError("unknown key", path + [extra[0]])
        step = item.get('step_K3')
        if step is not None:
            step = _int(step, path + ['step_K3'])
        curves.append(BaseCurve(_nonneg(item['genus'], path + ['genus']), step))
    if curves[-1].step_K3 not in (None, 0):
        raise SchemaError("the last component finishes the block, so K³ must be 0",
                          ['base_curves', len(curves) - 1, 'step_K3'])

    smoothing = None
    if 'smoothing' in data:
        raw = data['smoothing']
        if not isinstance(raw, dict) or set(raw) != {'b', 'sigma'}:
            raise SchemaError("expected exactly the keys b and sigma", ['smoothing'])
        smoothing = {k: _nonneg(raw[k], ['smoothing', k]) for k in ('b', 'sigma')}

    if 'b3_Y' in data:
        b3_Y = _nonneg(data['b3_Y'], ['b3_Y'])
        if smoothing is not None:
            derived = betti3_semifano(smoothing['b'], e, smoothing['sigma'])
            if derived != b3_Y:
                raise InconsistentReport(
                    f"b3_Y = {b3_Y} but the smoothing data give b - 2e + 2σ = {derived}")
    elif smoothing is not None:
        b3_Y = betti3_semifano(smoothing['b'], e, smoothing['sigma'])
    else:
        raise SchemaError("give b3_Y or smoothing", ['b3_Y'])

    torsion_free = data.get('torsion_free_h3', True)
    if not isinstance(torsion_free, bool):
        raise SchemaError("expected true or false", ['torsion_free_h3'])

    polarising_gram = None
    if 'polarising_gram' in data:
        polarising_gram = _gram(data['polarising_gram'], ['polarising_gram'])

    polarising_spec = data.get('polarising_spec')
    if polarising_spec is not None:
        if not isinstance(polarising_spec, str):
            raise SchemaError("expected a lattice expression", ['polarising_spec'])
        try:
            parse_lattice_spec(polarising_spec)
        except InputError as e:
            raise SchemaError(str(e), ['polarising_spec'])

    rank_K = _nonneg(data['rank_K'], ['rank_K']) if 'rank_K' in data else None

    flops = []
    if 'flops' in data:
        if not isinstance(data['flops'], list):
            raise SchemaError("expected a list of pairing vectors", ['flops'])
        flops = [tuple(_int_list(v, ['flops', i], n, nullable=True))
                 for i, v in enumerate(data['flops'])]

    div_c2_data = _int_list(data.get('div_c2_data', []), ['div_c2_data'])
    for i, d in enumerate(div_c2_data):
        if d <= 0 or d % 2:
            raise SchemaError(f"div c2 is a positive even number, got {d}", ['div_c2_data', i])

    quartic = None
    if 'quartic' in data:
        raw = data['quartic']
        if not isinstance(raw, dict) or not isinstance(raw.get('has_planes'), bool):
            raise SchemaError("expected {\"has_planes\": true|false}", ['quartic'])
        quartic = {'has_planes': raw['has_planes']}

    c2_modulo = []
    if 'c2_modulo' in data:
        if not isinstance(data['c2_modulo'], list):
            raise SchemaError("expected a list of classes", ['c2_modulo'])
        c2_modulo = [tuple(_int_list(v, ['c2_modulo', i], n))
                     for i, v in enumerate(data['c2_modulo'])]

    name = data.get('name', "")
    if not isinstance(name, str):
        raise SchemaError("expected a string", ['name'])

    return BlockDescriptor(
        picard_gram=gram,
        anticanonical=A,
        c2c1sq=c2c1sq,
        b3_Y=b3_Y,
        e=e,
        base_curves=curves,
        index=index,
        name=name,
        torsion_free_h3=torsion_free,
        smoothing=smoothing,
        polarising_gram=polarising_gram,
        polarising_spec=polarising_spec,
        rank_K=rank_K,
        flops=flops,
        div_c2_data=div_c2_data,
        quartic=quartic,
        c2_modulo=c2_modulo,
    )


@dataclass
class C2Result:
    """Divisibility of c2(Z) from the pairings of c2(Y) + c1(Y)² and the fibre classes"""

    pairings: Tuple[Optional[int], ...]
    fibre: Optional[List[int]]
    lower: int
    upper: int
    bound: int
    div_modulo: Optional[int] = None
    notes: List[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def div_c2(self) -> Optional[int]:
        return self.upper if self.exact else None

    @property
    def evenness(self) -> bool:
        return self.lower % 2 == 0 and self.upper % 2 == 0

    @property
    def coordinates(self) -> List[Optional[int]]:
        return list(self.pairings) + (self.fibre or [])


def _check_anticanonical(block: BlockDescriptor, pairings: Sequence[Optional[int]]) -> Optional[str]:
    expected = anticanonical_c2_pairing(block.degree)
    if any(p is None and a for p, a in zip(pairings, block.anticanonical)):
        return None
    value = sum(p * a for p, a in zip(pairings, block.anticanonical) if a)
    if value != expected:
        raise InconsistentC2(
            f"(c2 + c1²)·A = {value} but -K·c2 + (-K)³ = 24 + {block.degree} = {expected}")
    return f"(c2 + c1²)·A = 24 + (-K)³ = {expected}"


def c2_block(block: BlockDescriptor, steps: Optional[Sequence[Optional[int]]] = None,
             pairings: Optional[Sequence[Optional[int]]] = None,
             sublattice: Optional[Sequence[Sequence[int]]] = None) -> C2Result:
    """div c2(Z), or an interval for it when some pairings or steps are unknown.

    steps are the K³ values of the intermediate blow-ups (k - 1 of them);
    sublattice lists classes of H²(Y) whose images are factored out.
    """
    pairings = tuple(block.c2c1sq if pairings is None else pairings)
    if len(pairings) != block.picard_gram.rank:
        raise MalformedInput(f"expected {block.picard_gram.rank} pairings, got {len(pairings)}")
    steps = list(block.steps if steps is None else steps)
    if len(steps) != block.k - 1:
        raise MalformedInput(f"a pencil with {block.k} components needs {block.k - 1} steps, "
                             f"got {len(steps)}")

    notes = []
    checked = _check_anticanonical(block, pairings)
    if checked:
        notes.append(checked)

    fibre = None if any(s is None for s in steps) else fibre_coefficients(block.degree, steps)
    _, bound = div_c2_bounds(block.degree, block.index)
    notes.append(f"upper bound gcd((24 + (-K)³)/r, 24) = {bound}")

    known = [p for p in pairings if p is not None] + (fibre or [])
    complete = fibre is not None and all(p is not None for p in pairings)
    value = reduce(gcd, known, 0)
    if complete:
        if value % 2:
            raise InconsistentC2(f"c2(Z) has odd divisibility {value}")
        if bound % value:
            raise InconsistentC2(f"div c2 = {value} does not divide the bound {bound}")
        if block.k == 1 and block.picard_gram.rank == 1 and value != bound:
            raise InconsistentC2(f"Picard rank 1 with one component forces div c2 = {bound}, "
                                 f"got {value}")
        lower = upper = value
        notes.append(f"div c2 = gcd of pairings and fibre coefficients = {value}")
    else:
        upper = gcd(value, bound)
        if upper % 2:
            raise InconsistentC2(f"known pairings force an odd divisor {upper}")
        lower = 2
        notes.append(f"div c2 in [2, {upper}] from the known pairings")

    div_modulo = None
    if sublattice:
        if any(p is None for p in pairings):
            raise MalformedInput("divisibility modulo a sublattice needs every pairing")
        relations = matmul([list(v) for v in sublattice], block.picard_gram.rows())
        div_modulo = divisibility_modulo(pairings, relations, 24)
        notes.append(f"div c2 modulo the sublattice = {div_modulo}")

    logger.debug("c2 of %s: [%d, %d]", block.name or "block", lower, upper)
    return C2Result(pairings, fibre, lower, upper, bound, div_modulo, notes)


@dataclass
class BlockEvaluation:
    """Everything the report needs about one block"""

    block: BlockDescriptor
    cohomology: BlockCohomology
    profile: AcylProfile
    c2: C2Result
    flops: List[C2Result]
    div_c2: List[int]
    checks: List[str]
    banner: Optional[str] = None
    verdict: Optional[str] = None


def evaluate_block(block: BlockDescriptor) -> BlockEvaluation:
    checks = [f"degree A·G·A = {block.degree}, genus {block.genus}"]
    if block.smoothing is not None:
        checks.append(f"b3(Y) = b - 2e + 2σ = {block.b3_Y}")

    N = block.N
    cohomology = block_cohomology(block.picard_gram.rank, block.b3_Y,
                                  [c.genus for c in block.base_curves], rank_N=N.rank)
    checks.append(f"b3(Z) = b3(Y) + 2Σg = {cohomology.b3_Z}")
    rank_K = cohomology.rank_K
    if block.rank_K is not None and block.rank_K != rank_K:
        raise RankNullityViolation(f"declared rank K = {block.rank_K}, the pencil gives {rank_K}")
    profile = acyl_profile(cohomology.b2_Z, cohomology.b3_Z, N, rank_K)
    checks.append(f"rank K + rank N = b2(Z) - 1 = {cohomology.b2_Z - 1}")

    sublattice = block.c2_modulo or None
    c2 = c2_block(block, sublattice=sublattice)
    checks.extend(c2.notes)
    flops = []
    for i, alt in enumerate(block.flops):
        result = c2_block(block, pairings=alt)
        flops.append(result)
        checks.append(f"flop {i + 1}: div c2 in [{result.lower}, {result.upper}]")

    div_c2 = sorted({r.div_c2 for r in [c2] + flops if r.exact})
    if block.div_c2_data:
        data_values = sorted(set(block.div_c2_data))
        if div_c2 and div_c2 != data_values:
            raise InconsistentC2(f"computed div c2 {div_c2} differs from the data {data_values}")
        div_c2 = data_values
        checks.append(f"div c2 taken from data: {data_values}")

    if block.quartic is not None:
        sigma = (block.smoothing or {}).get('sigma', block.picard_gram.rank - 1)
        violations = theorem_quartic_checks(block.e, sigma, block.quartic['has_planes'])
        if violations:
            raise InconsistentReport("; ".join(violations))
        checks.append(f"nodal quartic rules hold for e = {block.e}, σ = {sigma}")

    verdict = None
    if block.polarising_spec is not None:
        verdict = verify_polarising_decomposition(N, block.polarising_spec).verdict
        if verdict == "profiles differ":
            raise InconsistentReport(f"N does not match {block.polarising_spec}")
        checks.append(f"N against {block.polarising_spec}: {verdict}")

    banner = None
    if not block.torsion_free_h3:
        banner = TORSION_BANNER
        warnings.warn(f"{block.name or 'block'}: H³ torsion not excluded", TorsionUnknown)

    logger.info("evaluated block %s: b2(Z) = %d, b3(Z) = %d", block.name or "?",
                cohomology.b2_Z, cohomology.b3_Z)
    return BlockEvaluation(block, cohomology, profile, c2, flops, div_c2, checks, banner, verdict)
