#!/usr/bin/env python3
"""Lattice polytopes in a rank-3 lattice N.

Everything is exact integer arithmetic: the hull is built incrementally from
integer plane equations, facets are classified through a Hermite form of
their edge lattice, and volumes come from integer determinants.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, cmp_to_key, reduce
from itertools import combinations, permutations
from math import ceil, floor, gcd
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from blocks.invariants import genus_degree
from lattice.gram import saturated_kernel
from utils.errors import (ComputationError, MalformedInput, NotFullDimensional, NotReflexive,
                          SearchTooLarge)

logger = logging.getLogger(__name__)

Point = Tuple[int, int, int]
Matrix3 = Tuple[Point, Point, Point]

TRIANGLE = "triangle"
PARALLELOGRAM = "parallelogram"
OTHER = "other"

BOX_LIMIT = 10 ** 7


def _sub(a, b) -> Point:
    return a[0] - b[0], a[1] - b[1], a[2] - b[2]


def _dot(a, b) -> int:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b) -> Point:
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def det3(a, b, c) -> int:
    return _dot(a, _cross(b, c))


def apply(A: Matrix3, v) -> Point:
    return tuple(_dot(row, v) for row in A)


def _primitive(v) -> Point:
    g = reduce(gcd, v, 0)
    return tuple(x // g for x in v)


# ----------------------------------------------------------------------------
# Hull
# ----------------------------------------------------------------------------

def _oriented_plane(a, b, c, points) -> Optional[Tuple[Point, int]]:
    """Inner primitive normal and level of the plane through a, b, c, if it supports points"""
    normal = _cross(_sub(b, a), _sub(c, a))
    if normal == (0, 0, 0):
        return None
    normal = _primitive(normal)
    level = _dot(normal, a)
    values = [_dot(normal, p) - level for p in points]
    if all(v >= 0 for v in values):
        return normal, level
    if all(v <= 0 for v in values):
        return tuple(-x for x in normal), -level
    return None


def _is_vertex(p, planes) -> bool:
    tight = [normal for normal, level in planes if _dot(normal, p) == level]
    return any(det3(*triple) for triple in combinations(tight, 3))


def convex_hull(points: Sequence[Sequence[int]]) -> Tuple[List[int], List[Tuple[Point, int]]]:
    """Indices of the extreme points (input order) and the facet planes ⟨m, x⟩ >= level.

    Points are inserted one at a time; a point outside the current hull drops
    the planes it violates and adds the supporting planes through itself and
    two current vertices.
    """
    pts = [tuple(int(x) for x in p) for p in points]
    if any(len(p) != 3 for p in pts):
        raise MalformedInput("points must have 3 coordinates")
    n = len(pts)
    if not n:
        raise NotFullDimensional("no points")
    i1 = next((i for i in range(n) if pts[i] != pts[0]), None)
    if i1 is None:
        raise NotFullDimensional("all points coincide")
    d1 = _sub(pts[i1], pts[0])
    i2 = next((i for i in range(n) if _cross(d1, _sub(pts[i], pts[0])) != (0, 0, 0)), None)
    if i2 is None:
        raise NotFullDimensional("the points are collinear")
    d2 = _sub(pts[i2], pts[0])
    i3 = next((i for i in range(n) if det3(d1, d2, _sub(pts[i], pts[0]))), None)
    if i3 is None:
        raise NotFullDimensional("the points are coplanar")

    current = [0, i1, i2, i3]
    simplex = [pts[i] for i in current]
    planes = {_oriented_plane(*(pts[i] for i in face), simplex) for face in combinations(current, 3)}
    for p in range(n):
        x = pts[p]
        if p in current or all(_dot(normal, x) >= level for normal, level in planes):
            continue
        kept = {(normal, level) for normal, level in planes if _dot(normal, x) >= level}
        hull = [pts[i] for i in current] + [x]
        for a, b in combinations(current, 2):
            plane = _oriented_plane(x, pts[a], pts[b], hull)
            if plane is not None:
                kept.add(plane)
        planes = kept
        current = [i for i in current if _is_vertex(pts[i], planes)] + [p]
    logger.debug("hull of %d points: %d vertices, %d facets", n, len(current), len(planes))
    return sorted(current), sorted(planes)


# ----------------------------------------------------------------------------
# Facets
# ----------------------------------------------------------------------------

def hermite_normal_form_2d(u, v) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Row Hermite form ((a, b), (0, d)) of the lattice spanned by u, v; a, d > 0 and 0 <= b < d"""
    u, v = list(u), list(v)
    while v[0]:
        q = u[0] // v[0]
        u, v = v, [u[0] - q * v[0], u[1] - q * v[1]]
    if u[0] < 0:
        u = [-u[0], -u[1]]
    if v[1] < 0:
        v = [0, -v[1]]
    if not u[0] or not v[1]:
        raise MalformedInput("the vectors are linearly dependent")
    return (u[0], u[1] % v[1]), (0, v[1])


def _plane_coordinates(basis, d) -> Tuple[int, int]:
    """Coordinates of a lattice vector d of the plane in its saturated basis"""
    k1, k2 = basis
    for s, t in ((0, 1), (0, 2), (1, 2)):
        det = k1[s] * k2[t] - k1[t] * k2[s]
        if det:
            a = d[s] * k2[t] - d[t] * k2[s]
            b = k1[s] * d[t] - k1[t] * d[s]
            if a % det or b % det:
                raise ComputationError(f"{d} is not in the lattice spanned by {k1}, {k2}")
            return a // det, b // det
    raise ComputationError("degenerate plane basis")


def _cyclic_order(coords: Dict[int, Tuple[int, int]]) -> Tuple[int, ...]:
    """Boundary order of a convex polygon's vertices, smallest index first then its smaller neighbour"""
    k = len(coords)
    sx = sum(c[0] for c in coords.values())
    sy = sum(c[1] for c in coords.values())
    centred = {i: (k * x - sx, k * y - sy) for i, (x, y) in coords.items()}

    def half(p):
        return 0 if p[1] > 0 or (p[1] == 0 and p[0] > 0) else 1

    def compare(i, j):
        a, b = centred[i], centred[j]
        if half(a) != half(b):
            return half(a) - half(b)
        cross = a[0] * b[1] - a[1] * b[0]
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    ring = sorted(coords, key=cmp_to_key(compare))
    start = ring.index(min(ring))
    ring = ring[start:] + ring[:start]
    if len(ring) > 2 and ring[-1] < ring[1]:
        ring = [ring[0]] + ring[:0:-1]
    return tuple(ring)


@dataclass(frozen=True)
class Facet:
    """Facet ⟨m, x⟩ = level with primitive inner normal m; vertices in boundary order"""

    vertices: Tuple[int, ...]
    normal: Point
    level: int
    kind: str = OTHER
    normal_form: Tuple[Tuple[int, int], Tuple[int, int]] = ((0, 0), (0, 0))
    interior_points: int = 0

    @property
    def diagonals(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        if len(self.vertices) != 4:
            raise MalformedInput(f"facet {self.vertices} is not a quadrilateral")
        w = self.vertices
        return (w[0], w[2]), (w[1], w[3])


def _classify(ring: Sequence[int], coords, points) -> Tuple[str, tuple]:
    w = [coords[i] for i in ring]
    edges = ((w[1][0] - w[0][0], w[1][1] - w[0][1]), (w[-1][0] - w[0][0], w[-1][1] - w[0][1]))
    form = hermite_normal_form_2d(*edges)
    unimodular = form == ((1, 0), (0, 1))
    if len(ring) == 3 and unimodular:
        return TRIANGLE, form
    if len(ring) == 4 and unimodular:
        a, b, c, d = (points[i] for i in ring)
        if _sub(a, b) == _sub(d, c):
            return PARALLELOGRAM, form
    return OTHER, form


def _box_points(lo, hi, normals, levels) -> List[Point]:
    """Lattice points of the box [lo, hi] satisfying normals·x >= levels"""
    sizes = [h - l + 1 for l, h in zip(lo, hi)]
    if sizes[0] * sizes[1] * sizes[2] > BOX_LIMIT:
        raise SearchTooLarge(f"bounding box {sizes} exceeds {BOX_LIMIT} lattice points")
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, 3)
    inside = np.all(grid @ np.array(normals, dtype=np.int64).T >= np.array(levels, dtype=np.int64),
                    axis=1)
    return sorted(tuple(int(x) for x in p) for p in grid[inside])


# ----------------------------------------------------------------------------
# Polytopes
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticePolytope:
    """Full-dimensional lattice polytope; vertices are the columns of its vertex matrix"""

    vertices: Tuple[Point, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        points = [tuple(int(x) for x in p) for p in self.vertices]
        extreme, _ = convex_hull(points)
        object.__setattr__(self, 'vertices', tuple(points[i] for i in extreme))

    @classmethod
    def from_text(cls, text: str, name: str = "") -> "LatticePolytope":
        return parse_polytope(text, name)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "LatticePolytope":
        return parse_polytope(Path(path).read_text(), Path(path).stem)

    def to_text(self) -> str:
        lines = [f"3 {len(self.vertices)}"]
        lines += [" ".join(str(v[r]) for v in self.vertices) for r in range(3)]
        return "\n".join(lines) + "\n"

    @cached_property
    def planes(self) -> List[Tuple[Point, int]]:
        return convex_hull(self.vertices)[1]

    @property
    def origin_interior(self) -> bool:
        return all(level < 0 for _, level in self.planes)

    @property
    def is_reflexive(self) -> bool:
        return all(level == -1 for _, level in self.planes)

    @cached_property
    def lattice_points(self) -> List[Point]:
        lo = [min(v[r] for v in self.vertices) for r in range(3)]
        hi = [max(v[r] for v in self.vertices) for r in range(3)]
        return _box_points(lo, hi, [n for n, _ in self.planes], [l for _, l in self.planes])

    @cached_property
    def facets(self) -> List[Facet]:
        points_on = {}
        for p in self.lattice_points:
            on = [k for k, (normal, level) in enumerate(self.planes) if _dot(normal, p) == level]
            if len(on) == 1:
                points_on[on[0]] = points_on.get(on[0], 0) + 1

        facets = []
        for k, (normal, level) in enumerate(self.planes):
            members = [i for i, v in enumerate(self.vertices) if _dot(normal, v) == level]
            basis = tuple(tuple(row) for row in saturated_kernel([list(normal)], 3))
            base = self.vertices[members[0]]
            coords = {i: _plane_coordinates(basis, _sub(self.vertices[i], base)) for i in members}
            ring = _cyclic_order(coords)
            kind, form = _classify(ring, coords, self.vertices)
            facets.append(Facet(ring, normal, level, kind, form, points_on.get(k, 0)))
        return sorted(facets, key=lambda f: tuple(sorted(f.vertices)))

    @property
    def parallelograms(self) -> List[Facet]:
        return [f for f in self.facets if f.kind == PARALLELOGRAM]

    def index_of(self, point) -> int:
        try:
            return self.vertices.index(tuple(point))
        except ValueError:
            raise MalformedInput(f"{tuple(point)} is not a vertex of {self.name or 'the polytope'}")


def _tokens(text: str) -> List[Tuple[int, List[str]]]:
    lines = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if tokens and not tokens[0].startswith('#'):
            lines.append((lineno, tokens))
    return lines


def _ints(lineno: int, tokens: List[str], count: int) -> List[int]:
    if len(tokens) != count:
        raise MalformedInput(f"line {lineno}: expected {count} integers, got {len(tokens)}")
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise MalformedInput(f"line {lineno}: {e}")


def parse_polytopes(text: str, name: str = "") -> List[LatticePolytope]:
    """Every polytope of a (possibly concatenated) vertex-matrix file.

    Each record is a header ``3 k`` followed by 3 rows of k integers; the
    transposed form ``k 3`` followed by k rows of 3 integers is accepted too.
    Anything after the first two header tokens is ignored.
    """
    lines = _tokens(text)
    records = []
    pos = 0
    while pos < len(lines):
        lineno, header = lines[pos]
        try:
            rows, cols = int(header[0]), int(header[1])
        except (ValueError, IndexError):
            raise MalformedInput(f"line {lineno}: expected a header 'rows columns', "
                                 f"got {' '.join(header)!r}")
        if rows == 3:
            count, width = 3, cols
        elif cols == 3:
            count, width = rows, 3
        else:
            raise MalformedInput(f"line {lineno}: header {rows} {cols} is not a rank-3 vertex matrix")
        body = lines[pos + 1:pos + 1 + count]
        if len(body) < count:
            raise MalformedInput(f"line {lineno}: expected {count} rows after the header, "
                                 f"got {len(body)}")
        matrix = [_ints(no, tokens, width) for no, tokens in body]
        records.append(list(zip(*matrix)) if rows == 3 else [tuple(row) for row in matrix])
        pos += 1 + count
    if not records:
        raise MalformedInput("no polytope found")
    if len(records) == 1:
        return [LatticePolytope(tuple(records[0]), name)]
    return [LatticePolytope(tuple(points), f"{name}:{k}") for k, points in enumerate(records, start=1)]


def parse_polytope(text: str, name: str = "") -> LatticePolytope:
    polytopes = parse_polytopes(text, name)
    if len(polytopes) > 1:
        raise MalformedInput(f"expected one polytope, found {len(polytopes)}")
    return polytopes[0]


# ----------------------------------------------------------------------------
# Duality, volume and equivalence
# ----------------------------------------------------------------------------

def dual_polytope(P: LatticePolytope) -> LatticePolytope:
    """{m : ⟨m, x⟩ >= -1 on P}; a lattice polytope exactly when P is reflexive"""
    if not P.is_reflexive:
        raise NotReflexive(f"{P.name or 'polytope'} has a facet at lattice height "
                           f"{max(-l for _, l in P.planes)}")
    return LatticePolytope(tuple(normal for normal, _ in P.planes), f"{P.name}*" if P.name else "")


def polar_lattice_points(P: LatticePolytope) -> List[Point]:
    """Lattice points m with ⟨m, v⟩ >= -1 on every vertex v"""
    if not P.origin_interior:
        raise MalformedInput("the origin must be an interior point")
    corners = [tuple(Fraction(x, -level) for x in normal) for normal, level in P.planes]
    lo = [floor(min(c[r] for c in corners)) for r in range(3)]
    hi = [ceil(max(c[r] for c in corners)) for r in range(3)]
    return _box_points(lo, hi, list(P.vertices), [-1] * len(P.vertices))


def normalized_volume(P: LatticePolytope) -> int:
    """6·vol(P) as a sum of cone determinants over fan-triangulated facets"""
    if not P.origin_interior:
        raise MalformedInput("the origin must be an interior point")
    total = 0
    for facet in P.facets:
        w = [P.vertices[i] for i in facet.vertices]
        total += sum(abs(det3(w[0], w[t], w[t + 1])) for t in range(1, len(w) - 1))
    return total


def _linear_maps(P: LatticePolytope, Q: LatticePolytope) -> Iterator[Matrix3]:
    """Every A in GL3(Z) with A·vertices(P) = vertices(Q)"""
    if not (P.origin_interior and Q.origin_interior):
        raise MalformedInput("linear equivalence needs the origin in both interiors")
    if len(P.vertices) != len(Q.vertices) or len(P.facets) != len(Q.facets):
        return
    # a facet misses the origin, so three consecutive vertices of it are a basis of Q^3
    source = min(P.facets, key=lambda f: (len(f.vertices), f.vertices))
    b1, b2, b3 = (P.vertices[i] for i in source.vertices[:3])
    d = det3(b1, b2, b3)
    inverse_rows = (_cross(b2, b3), _cross(b3, b1), _cross(b1, b2))
    target = set(Q.vertices)
    for facet in Q.facets:
        if len(facet.vertices) != len(source.vertices):
            continue
        for images in permutations(facet.vertices, 3):
            y = [Q.vertices[i] for i in images]
            A = []
            for r in range(3):
                nums = [sum(y[t][r] * inverse_rows[t][c] for t in range(3)) for c in range(3)]
                if any(x % d for x in nums):
                    break
                A.append(tuple(x // d for x in nums))
            else:
                A = tuple(A)
                if abs(det3(*A)) == 1 and {apply(A, v) for v in P.vertices} == target:
                    yield A


def is_unimodular_equivalent(P: LatticePolytope, Q: LatticePolytope) -> Optional[Matrix3]:
    """A matrix A ∈ GL3(Z) carrying P onto Q, or None"""
    return next(_linear_maps(P, Q), None)


def automorphisms(P: LatticePolytope) -> List[Matrix3]:
    autos = sorted(set(_linear_maps(P, P)))
    logger.debug("%s: automorphism group of order %d", P.name or "polytope", len(autos))
    return autos


def vertex_permutation(P: LatticePolytope, A: Matrix3) -> Tuple[int, ...]:
    return tuple(P.index_of(apply(A, v)) for v in P.vertices)


# ----------------------------------------------------------------------------
# Picard rank and profile
# ----------------------------------------------------------------------------

def cartier_rank(P: LatticePolytope) -> int:
    """Picard rank of the toric variety of the face fan of P.

    Unknowns are one linear function per facet cone; they must agree on every
    shared ray. The solution space has dimension ρ + 3.
    """
    if not P.is_reflexive:
        raise NotReflexive(f"{P.name or 'polytope'} is not reflexive")
    facets = P.facets
    width = 3 * len(facets)
    rows = []
    for i, v in enumerate(P.vertices):
        around = [k for k, f in enumerate(facets) if i in f.vertices]
        for f, g in zip(around, around[1:]):
            row = [0] * width
            row[3 * f:3 * f + 3] = v
            row[3 * g:3 * g + 3] = [-x for x in v]
            rows.append(row)
    rank = sympy.Matrix(rows).rank() if rows else 0
    return width - rank - 3


@dataclass(frozen=True)
class PolytopeProfile:
    """Reflexivity, terminality and the numbers of the toric Fano 3-fold of a polytope"""

    reflexive: bool
    vertices: int
    facets: int
    lattice_points: int
    self_dual: Optional[bool] = None
    terminal: Optional[bool] = None
    semismall: Optional[bool] = None
    e: Optional[int] = None
    rho_resolution: Optional[int] = None
    degree: Optional[int] = None
    genus: Optional[int] = None
    rho_X: Optional[int] = None
    sigma: Optional[int] = None
    facet_kinds: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'reflexive': self.reflexive,
            'vertices': self.vertices,
            'facets': self.facets,
            'lattice_points': self.lattice_points,
            'self_dual': self.self_dual,
            'terminal': self.terminal,
            'semismall': self.semismall,
            'e': self.e,
            'rho_resolution': self.rho_resolution,
            'degree': self.degree,
            'genus': self.genus,
            'rho_X': self.rho_X,
            'sigma': self.sigma,
            'facet_kinds': dict(sorted(self.facet_kinds.items())),
        }


def polytope_profile(P: LatticePolytope) -> PolytopeProfile:
    facets = P.facets
    points = len(P.lattice_points)
    kinds = {}
    for f in facets:
        kinds[f.kind] = kinds.get(f.kind, 0) + 1
    if not P.is_reflexive:
        logger.info("%s is not reflexive; terminality and degree are not defined",
                    P.name or "polytope")
        return PolytopeProfile(False, len(P.vertices), len(facets), points, facet_kinds=kinds)

    dual = dual_polytope(P)
    degree = normalized_volume(dual)
    rho_Y = points - 4
    rho_X = cartier_rank(P)
    profile = PolytopeProfile(
        reflexive=True,
        vertices=len(P.vertices),
        facets=len(facets),
        lattice_points=points,
        self_dual=is_unimodular_equivalent(P, dual) is not None,
        terminal=kinds.get(OTHER, 0) == 0,
        semismall=all(f.interior_points == 0 for f in facets),
        e=kinds.get(PARALLELOGRAM, 0),
        rho_resolution=rho_Y,
        degree=degree,
        genus=genus_degree(degree).g,
        rho_X=rho_X,
        sigma=rho_Y - rho_X,
        facet_kinds=kinds,
    )
    logger.info("%s: degree %d, e = %d, ρ(Y) = %d, ρ(X) = %d", P.name or "polytope",
                degree, profile.e, rho_Y, rho_X)
    return profile
