#!/usr/bin/env python3
"""Small resolutions of terminal Gorenstein toric Fano 3-folds.

The face fan of a terminal reflexive polytope has a unimodular triangle or a
unimodular parallelogram over every facet. Splitting each parallelogram along
one of its two diagonals gives a complete simplicial fan; when every cone is
unimodular the toric variety Y is a smooth weak Fano with -K nef, and
blocks can be built from it.
"""

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple, Union

from blocks.descriptor import BlockDescriptor
from blocks.invariants import genus_degree, rigidity_h1
from lattice.gram import GramLattice
from toric.polytope import (OTHER, TRIANGLE, LatticePolytope, Point, automorphisms, det3,
                            normalized_volume, dual_polytope, polar_lattice_points,
                            vertex_permutation, _cross, _dot)
from toric.simplex import maximize
from utils.errors import (ComputationError, DegreeMismatch, InconsistentReport, MalformedInput,
                          NotReflexive, NotSmooth, NotTerminal)
from utils.settings import get_settings

logger = logging.getLogger(__name__)

Cone = Tuple[int, int, int]
Triple = Tuple[int, int, int]


@dataclass(frozen=True)
class FanResolution:
    """A complete simplicial fan on the vertices of a polytope"""

    rays: Tuple[Point, ...]
    max_cones: Tuple[Cone, ...]
    choice: str = ""

    @property
    def nodes(self) -> int:
        return len(self.choice)

    @property
    def smooth(self) -> bool:
        return all(abs(det3(*(self.rays[i] for i in cone))) == 1 for cone in self.max_cones)


def _require_terminal(P: LatticePolytope):
    if not P.is_reflexive:
        raise NotReflexive(f"{P.name or 'polytope'} is not reflexive")
    bad = [f.vertices for f in P.facets if f.kind == OTHER]
    if bad:
        raise NotTerminal(f"{P.name or 'polytope'} has {len(bad)} facets that are neither "
                          f"unimodular triangles nor parallelograms, first {bad[0]}")


def _cones_for(P: LatticePolytope, bits: Sequence[int]) -> Tuple[Cone, ...]:
    cones = []
    parallelogram = 0
    for facet in P.facets:
        w = facet.vertices
        if facet.kind == TRIANGLE:
            cones.append(tuple(sorted(w)))
            continue
        if bits[parallelogram]:
            cones += [tuple(sorted((w[0], w[1], w[3]))), tuple(sorted((w[1], w[2], w[3])))]
        else:
            cones += [tuple(sorted((w[0], w[1], w[2]))), tuple(sorted((w[0], w[2], w[3])))]
        parallelogram += 1
    return tuple(sorted(cones))


def resolution_for_choice(P: LatticePolytope, choice: Union[str, Sequence[int]] = "") -> FanResolution:
    """Resolution using diagonal w0-w2 (0) or w1-w3 (1) in the k-th parallelogram facet"""
    _require_terminal(P)
    count = len(P.parallelograms)
    if isinstance(choice, str):
        text = choice or "0" * count
        if set(text) - {"0", "1"}:
            raise MalformedInput(f"diagonal choice {choice!r} must be a bitstring")
        bits = [int(c) for c in text]
    else:
        bits = [int(b) for b in choice]
        if set(bits) - {0, 1}:
            raise MalformedInput(f"diagonal choice {choice!r} must contain only 0 and 1")
    if len(bits) != count:
        raise MalformedInput(f"{P.name or 'polytope'} has {count} parallelogram facets, "
                             f"choice has {len(bits)} bits")
    return FanResolution(P.vertices, _cones_for(P, bits), "".join(str(b) for b in bits))


def enumerate_resolutions(P: LatticePolytope) -> List[FanResolution]:
    _require_terminal(P)
    count = len(P.parallelograms)
    return [FanResolution(P.vertices, _cones_for(P, bits), "".join(map(str, bits)))
            for bits in product((0, 1), repeat=count)]


# ----------------------------------------------------------------------------
# Walls and projectivity
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Wall:
    """2-cone (i, j) between the maximal cones (i, j, a) and (i, j, b).

    The rays satisfy v_a + v_b + alpha·v_i + beta·v_j = 0, so the curve of
    the wall meets D_a and D_b once, D_i alpha times and D_j beta times.
    """

    i: int
    j: int
    a: int
    b: int
    alpha: int
    beta: int


def fan_walls(res: FanResolution) -> List[Wall]:
    around: Dict[Tuple[int, int], List[int]] = {}
    for cone in res.max_cones:
        for i, j in combinations(cone, 2):
            around.setdefault((i, j), []).append(next(k for k in cone if k not in (i, j)))

    walls = []
    for (i, j), opposite in sorted(around.items()):
        if len(opposite) != 2:
            raise MalformedInput(f"the fan is not complete: 2-cone ({i}, {j}) lies on "
                                 f"{len(opposite)} maximal cones")
        a, b = sorted(opposite)
        vi, vj, va, vb = (res.rays[k] for k in (i, j, a, b))
        d = det3(vi, vj, va)
        s = tuple(x + y for x, y in zip(va, vb))
        x, y, z = det3(s, vj, va), det3(vi, s, va), det3(vi, vj, s)
        if abs(d) != 1 or z or x % d or y % d:
            raise NotSmooth(f"cones ({i}, {j}, {a}) and ({i}, {j}, {b}) are not unimodular")
        walls.append(Wall(i, j, a, b, -x // d, -y // d))
    return walls


def wall_slack(wall: Wall, heights: Sequence) -> Fraction:
    """D·C for D = Σ h_k D_k and C the curve of the wall"""
    h = heights
    return h[wall.a] + h[wall.b] + wall.alpha * h[wall.i] + wall.beta * h[wall.j]


@dataclass
class Projectivity:
    """Whether a resolution is projective, with integral heights of an ample divisor"""

    projective: bool
    slack: Fraction
    heights: Optional[Tuple[int, ...]] = None


def check_projectivity_certificate(res: FanResolution, heights: Sequence[int]) -> bool:
    """True iff Σ h_k D_k is positive on every torus-invariant curve"""
    if len(heights) != len(res.rays):
        raise MalformedInput(f"expected {len(res.rays)} heights, got {len(heights)}")
    return all(wall_slack(w, heights) > 0 for w in fan_walls(res))


def is_projective(res: FanResolution) -> Projectivity:
    """Maximise the smallest wall slack ε <= 1 over divisors vanishing on the first cone"""
    walls = fan_walls(res)
    n = len(res.rays)
    fixed = set(res.max_cones[0])
    free = [k for k in range(n) if k not in fixed]
    column = {k: t for t, k in enumerate(free)}
    width = 2 * len(free) + 1

    rows, rhs = [], []
    for w in walls:
        row = [0] * width
        for k, coef in ((w.a, 1), (w.b, 1), (w.i, w.alpha), (w.j, w.beta)):
            if k in column:
                row[2 * column[k]] -= coef
                row[2 * column[k] + 1] += coef
        row[-1] = 1
        rows.append(row)
        rhs.append(0)
    rows.append([0] * (width - 1) + [1])
    rhs.append(1)
    objective = [0] * (width - 1) + [1]

    result = maximize(objective, rows, rhs)
    if not result.optimal:
        raise ComputationError("the projectivity program is unbounded")
    if result.value <= 0:
        return Projectivity(False, result.value)

    raw = [Fraction(0)] * n
    for k, t in column.items():
        raw[k] = result.x[2 * t] - result.x[2 * t + 1]
    scale = lcm(*(x.denominator for x in raw))
    heights = tuple(int(x * scale) for x in raw)
    if not check_projectivity_certificate(res, heights):
        raise ComputationError(f"heights {heights} fail the wall inequalities")
    return Projectivity(True, result.value, heights)


# ----------------------------------------------------------------------------
# Symmetries
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalAction:
    """How a lattice automorphism permutes vertices and moves diagonal choices"""

    permutation: Tuple[int, ...]
    target: Tuple[int, ...]
    flips: Tuple[int, ...]

    def act(self, choice: str) -> str:
        out = ["0"] * len(choice)
        for k, bit in enumerate(choice):
            out[self.target[k]] = str(int(bit) ^ self.flips[k])
        return "".join(out)


def diagonal_actions(P: LatticePolytope) -> List[DiagonalAction]:
    parallelograms = P.parallelograms
    position = {frozenset(f.vertices): k for k, f in enumerate(parallelograms)}
    actions = []
    for A in automorphisms(P):
        perm = vertex_permutation(P, A)
        target, flips = [], []
        for f in parallelograms:
            t = position[frozenset(perm[i] for i in f.vertices)]
            first = {perm[i] for i in f.diagonals[0]}
            target.append(t)
            flips.append(0 if first == set(parallelograms[t].diagonals[0]) else 1)
        actions.append(DiagonalAction(perm, tuple(target), tuple(flips)))
    return actions


def choice_orbits(P: LatticePolytope, actions: Optional[List[DiagonalAction]] = None
                  ) -> Dict[str, List[str]]:
    """Orbits of diagonal choices keyed by their smallest member"""
    actions = diagonal_actions(P) if actions is None else actions
    orbits: Dict[str, List[str]] = {}
    for bits in product("01", repeat=len(P.parallelograms)):
        choice = "".join(bits)
        rep = min(a.act(choice) for a in actions)
        orbits.setdefault(rep, []).append(choice)
    return orbits


def relabel(res: FanResolution, permutation: Sequence[int], choice: str = "") -> FanResolution:
    """The fan with ray k renamed to permutation[k]"""
    cones = tuple(sorted(tuple(sorted(permutation[i] for i in cone)) for cone in res.max_cones))
    return FanResolution(res.rays, cones, choice or res.choice)


@dataclass
class ResolutionClasses:
    """Counts of resolutions, projective ones and their classes up to symmetry"""

    total: int
    projective_count: int
    class_count: int
    orbit_count: int
    group_order: int
    certificates: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'total': self.total,
            'projective': self.projective_count,
            'classes': self.class_count,
            'orbits': self.orbit_count,
            'group_order': self.group_order,
            'certificates': {k: list(v) for k, v in sorted(self.certificates.items())},
        }


def _projectivity_of(res: FanResolution) -> Projectivity:
    return is_projective(res)


def resolution_classes(P: LatticePolytope, workers: Optional[int] = None) -> ResolutionClasses:
    """Projective small resolutions of P up to lattice automorphisms.

    Projectivity is invariant under automorphisms, so only one representative
    per orbit of diagonal choices is tested.
    """
    _require_terminal(P)
    workers = get_settings().workers if workers is None else workers
    actions = diagonal_actions(P)
    orbits = choice_orbits(P, actions)
    reps = sorted(orbits)
    fans = [resolution_for_choice(P, rep) for rep in reps]
    logger.info("%s: %d diagonal choices in %d orbits under a group of order %d",
                P.name or "polytope", 2 ** len(P.parallelograms), len(reps), len(actions))

    if workers > 1 and len(fans) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_projectivity_of, fans))
    else:
        results = [_projectivity_of(f) for f in fans]

    certificates = {rep: r.heights for rep, r in zip(reps, results) if r.projective}
    projective = sum(len(orbits[rep]) for rep in certificates)
    return ResolutionClasses(
        total=2 ** len(P.parallelograms),
        projective_count=projective,
        class_count=len(certificates),
        orbit_count=len(reps),
        group_order=len(actions),
        certificates=certificates,
    )


# ----------------------------------------------------------------------------
# Intersection numbers and invariants
# ----------------------------------------------------------------------------

def triple_intersections(res: FanResolution) -> Dict[Triple, int]:
    """D_i·D_j·D_k keyed by the sorted index triple; absent keys are zero"""
    triple: Dict[Triple, int] = {}
    for cone in res.max_cones:
        triple[tuple(sorted(cone))] = 1
    for w in fan_walls(res):
        triple[tuple(sorted((w.i, w.i, w.j)))] = w.alpha
        triple[tuple(sorted((w.i, w.j, w.j)))] = w.beta

    for i, v in enumerate(res.rays):
        t = next(c for c in range(3) if v[c])
        total = sum(res.rays[k][t] * triple.get(tuple(sorted((i, i, k))), 0)
                    for k in range(len(res.rays)) if k != i)
        if total % v[t]:
            raise ComputationError(f"D_{i}³ = {Fraction(-total, v[t])} is not an integer")
        triple[(i, i, i)] = -total // v[t]
    return {k: x for k, x in triple.items() if x}


def picard_basis(res: FanResolution) -> Tuple[Cone, Tuple[int, ...]]:
    """First unimodular ray triple and the remaining rays, whose divisors form a basis of Pic"""
    n = len(res.rays)
    for triple in combinations(range(n), 3):
        if abs(det3(*(res.rays[i] for i in triple))) == 1:
            return triple, tuple(k for k in range(n) if k not in triple)
    raise NotSmooth("no unimodular triple of rays")


@dataclass
class FanInvariants:
    """Intersection data of a smooth toric weak Fano 3-fold"""

    smooth: bool
    antiK_cubed: Optional[int] = None
    boundary_k3_gram: Optional[GramLattice] = None
    demazure_roots: Optional[int] = None
    rigid: Optional[bool] = None
    h1: Optional[int] = None
    picard_rank: Optional[int] = None
    triple: Dict[Triple, int] = field(default_factory=dict)
    c2: Tuple[int, ...] = ()
    c2c1sq: Tuple[int, ...] = ()
    cubes: Tuple[int, ...] = ()
    checks: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'smooth': self.smooth,
            'antiK_cubed': self.antiK_cubed,
            'boundary_k3_gram': self.boundary_k3_gram.rows() if self.boundary_k3_gram else None,
            'demazure_roots': self.demazure_roots,
            'rigid': self.rigid,
            'h1': self.h1,
            'picard_rank': self.picard_rank,
            'c2': list(self.c2),
            'c2c1sq': list(self.c2c1sq),
            'cubes': list(self.cubes),
            'checks': list(self.checks),
        }


def demazure_roots(res: FanResolution, polytope: Optional[LatticePolytope] = None) -> int:
    """Lattice points m with ⟨m, v⟩ = -1 on exactly one ray and >= 0 on the others"""
    P = polytope if polytope is not None else LatticePolytope(res.rays)
    count = 0
    for m in polar_lattice_points(P):
        values = [_dot(m, v) for v in res.rays]
        if min(values) == -1 and values.count(-1) == 1:
            count += 1
    return count


def fan_invariants(res: FanResolution, polytope: Optional[LatticePolytope] = None,
                   strict: bool = True) -> FanInvariants:
    if not res.smooth:
        if strict:
            raise NotSmooth(f"resolution {res.choice or '(no parallelograms)'} has a "
                            f"non-unimodular cone")
        logger.warning("resolution %s is not smooth; intersection numbers skipped", res.choice)
        return FanInvariants(smooth=False)

    n = len(res.rays)
    triple = triple_intersections(res)

    def t(i, j, k):
        return triple.get(tuple(sorted((i, j, k))), 0)

    gram = [[sum(t(k, l, m) for m in range(n)) for l in range(n)] for k in range(n)]
    degree = sum(sum(row) for row in gram)
    edges = sorted({pair for cone in res.max_cones for pair in combinations(cone, 2)})
    c2 = tuple(sum(t(i, j, k) for i, j in edges) for k in range(n))
    c2c1sq = tuple(c + sum(row) for c, row in zip(c2, gram))
    checks = [f"(-K)³ = {degree}"]

    if sum(c2) != 24:
        raise InconsistentReport(f"c2·(-K) = {sum(c2)}, expected 24")
    checks.append("c2·(-K) = 24")
    checks.append(f"(c2 + c1²)·(-K) = 24 + {degree} = {sum(c2c1sq)}")

    if polytope is not None:
        expected = normalized_volume(dual_polytope(polytope))
        if expected != degree:
            message = f"(-K)³ = {degree} but the dual polytope has volume {expected}"
            warnings.warn(message, DegreeMismatch)
            checks.append(message)
        else:
            checks.append(f"(-K)³ equals the dual volume {expected}")

    roots = demazure_roots(res, polytope)
    g = genus_degree(degree).g
    h1 = rigidity_h1(3 + roots, n - 3, g)
    logger.info("resolution %s: (-K)³ = %d, %d roots, h1(T) = %d", res.choice or "-", degree, roots, h1)
    return FanInvariants(
        smooth=True,
        antiK_cubed=degree,
        boundary_k3_gram=GramLattice.from_rows(gram),
        demazure_roots=roots,
        rigid=h1 == 0,
        h1=h1,
        picard_rank=n - 3,
        triple=triple,
        c2=c2,
        c2c1sq=c2c1sq,
        cubes=tuple(t(k, k, k) for k in range(n)),
        checks=checks,
    )


# ----------------------------------------------------------------------------
# Blocks
# ----------------------------------------------------------------------------

def _blowup_steps(gram: Sequence[Sequence[int]], degree: int) -> List[int]:
    """K³ after blowing up the boundary curves one at a time, in ray order"""
    n = len(gram)
    antiK = [sum(row) for row in gram]
    steps = []
    for k in range(n):
        genus = gram[k][k] // 2 + 1
        degree = degree - 2 * antiK[k] + 2 * genus - 2
        steps.append(-degree)
        for l in range(k + 1, n):
            antiK[l] -= gram[k][l]
    return steps


def resolution_block_descriptor(res: FanResolution, name: str = "", split_boundary: bool = False,
                                polarising_spec: Optional[str] = None) -> BlockDescriptor:
    """Block descriptor of Y in the basis of divisors left after picard_basis.

    With split_boundary the pencil is spanned by a smooth anticanonical K3 and
    the toric boundary, so its base curve splits into one rational curve per ray.
    """
    inv = fan_invariants(res)
    basis, rest = picard_basis(res)
    dual_rows = [_cross(res.rays[basis[1]], res.rays[basis[2]]),
                 _cross(res.rays[basis[2]], res.rays[basis[0]]),
                 _cross(res.rays[basis[0]], res.rays[basis[1]])]
    d = det3(*(res.rays[i] for i in basis))
    anticanonical = [1 - sum(_dot(m, res.rays[k]) for m in dual_rows) // d for k in rest]

    gram = inv.boundary_k3_gram.rows()
    data = {
        'name': name,
        'picard_gram': [[gram[k][l] for l in rest] for k in rest],
        'anticanonical': anticanonical,
        'c2c1sq': [inv.c2c1sq[k] for k in rest],
        'b3_Y': 0,
    }
    if split_boundary:
        steps = _blowup_steps(gram, inv.antiK_cubed)
        if steps[-1] != 0:
            raise InconsistentReport(f"blowing up every boundary curve leaves K³ = {steps[-1]}")
        data['base_curves'] = ([{'genus': gram[k][k] // 2 + 1, 'step_K3': s}
                                for k, s in enumerate(steps[:-1])]
                               + [{'genus': gram[-1][-1] // 2 + 1}])
        meets = sum(gram[k][l] for k, l in combinations(range(len(gram)), 2))
        data['e'] = res.nodes + meets
    else:
        data['base_curves'] = [{'genus': genus_degree(inv.antiK_cubed).g}]
        data['e'] = res.nodes
    if polarising_spec is not None:
        data['polarising_spec'] = polarising_spec
    return BlockDescriptor.from_dict(data)
