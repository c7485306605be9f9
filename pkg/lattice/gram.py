#!/usr/bin/env python3
"""Exact integral lattice arithmetic on Gram matrices.

All entries are Python integers (arbitrary precision); rational work uses
``fractions.Fraction`` or ``sympy`` so nothing here can overflow or round.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from utils.errors import ComputationError, DegenerateAmbient, DependentRows, MalformedInput

logger = logging.getLogger(__name__)

IntMatrix = List[List[int]]


def _rows(matrix) -> IntMatrix:
    """Normalise nested sequences / numpy arrays to a list of int lists"""
    if isinstance(matrix, np.ndarray):
        if matrix.ndim == 1 and matrix.size == 0:
            return []
        return [[int(x) for x in row] for row in matrix.tolist()]
    return [[int(x) for x in row] for row in matrix]


def _shape(matrix: IntMatrix, ncols: Optional[int] = None) -> Tuple[int, int]:
    if not matrix:
        return 0, (ncols or 0)
    return len(matrix), len(matrix[0])


def identity(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul(a: IntMatrix, b: IntMatrix, inner: Optional[int] = None) -> IntMatrix:
    """Exact integer product via object-dtype numpy arrays"""
    ra, ca = _shape(a, inner)
    rb, cb = _shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {ra}x{ca} @ {rb}x{cb}")
    if ra == 0:
        return []
    if cb == 0:
        return [[] for _ in range(ra)]
    if ca == 0:
        return [[0] * cb for _ in range(ra)]
    left = np.array(a, dtype=object).reshape(ra, ca)
    right = np.array(b, dtype=object).reshape(rb, cb)
    return _rows(left.dot(right))


def transpose(a: IntMatrix, ncols: Optional[int] = None) -> IntMatrix:
    rows, cols = _shape(a, ncols)
    return [[a[i][j] for i in range(rows)] for j in range(cols)]


def congruent(gram: IntMatrix, basis: IntMatrix) -> IntMatrix:
    """basis · gram · basisᵀ"""
    n = len(gram)
    if not basis:
        return []
    return matmul(matmul(basis, gram), transpose(basis, n))


# ----------------------------------------------------------------------------
# Smith normal form
# ----------------------------------------------------------------------------

def _snf(matrix: IntMatrix, ncols: Optional[int] = None):
    """Smith normal form with transforms: returns (D, U, V, V⁻¹) with U·M·V = D"""
    A = [row[:] for row in matrix]
    k, n = _shape(A, ncols)
    U = identity(k)
    V = identity(n)
    Vinv = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        A[dst] = [x + q * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        # col_dst += q * col_src ; the inverse performs row_src -= q * row_dst
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]
        Vinv[src] = [x - q * y for x, y in zip(Vinv[src], Vinv[dst])]

    t = 0
    while t < min(k, n):
        pivot = None
        for i in range(t, k):
            for j in range(t, n):
                if A[i][j] and (pivot is None or abs(A[i][j]) < abs(A[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])

        while True:
            for i in range(t + 1, k):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))

            leftovers = [(abs(A[i][t]), i, None) for i in range(t + 1, k) if A[i][t]]
            leftovers += [(abs(A[t][j]), None, j) for j in range(t + 1, n) if A[t][j]]
            if leftovers:
                _, i, j = min(leftovers, key=lambda item: item[0])
                if i is not None:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue

            offender = next(((i, j) for i in range(t + 1, k) for j in range(t + 1, n)
                             if A[i][j] % A[t][t]), None)
            if offender is None:
                break
            add_row(t, offender[0], 1)

        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1

    return A, U, V, Vinv


def smith_normal_form(matrix, ncols: Optional[int] = None) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (D, U, V) with U·M·V = D, d₁ | d₂ | … ≥ 0 and U, V unimodular"""
    D, U, V, _ = _snf(_rows(matrix), ncols)
    return D, U, V


def invariant_factors(matrix, ncols: Optional[int] = None) -> List[int]:
    """Nonzero diagonal of the Smith normal form"""
    D, _, _ = smith_normal_form(matrix, ncols)
    return [D[i][i] for i in range(min(_shape(D, ncols))) if D[i][i]]


def saturated_kernel(matrix: IntMatrix, ncols: int) -> IntMatrix:
    """Rows spanning {x ∈ ℤⁿ : M·x = 0}; the span is saturated"""
    D, _, V, _ = _snf(matrix, ncols)
    rank = sum(1 for i in range(min(_shape(D, ncols))) if D[i][i])
    basis = [[V[r][c] for r in range(ncols)] for c in range(rank, ncols)]
    return [_positive_leading(row) for row in basis]


def _positive_leading(row: List[int]) -> List[int]:
    lead = next((x for x in row if x), 0)
    return [-x for x in row] if lead < 0 else row


def matrix_rank(matrix: IntMatrix) -> int:
    if not matrix or not matrix[0]:
        return 0
    return sympy.Matrix(matrix).rank()


# ----------------------------------------------------------------------------
# Gram lattices
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeProfile:
    """Congruence invariants of a (possibly degenerate) integral lattice"""

    rank: int
    signature: Tuple[int, int, int]
    det: int
    even: bool
    disc_invariant_factors: Tuple[int, ...]
    p_elementary: Optional[Tuple[int, int]] = None

    @property
    def nondegenerate(self) -> bool:
        return self.signature[1] == 0

    @property
    def disc_order(self) -> int:
        order = 1
        for d in self.disc_invariant_factors:
            order *= d
        return order

    def to_dict(self) -> dict:
        return {
            'rank': self.rank,
            'signature': list(self.signature),
            'det': self.det,
            'even': self.even,
            'disc_invariant_factors': list(self.disc_invariant_factors),
            'p_elementary': list(self.p_elementary) if self.p_elementary else None,
        }


@dataclass(frozen=True)
class GramLattice:
    """Symmetric integer Gram matrix of a finitely generated bilinear lattice"""

    gram: Tuple[Tuple[int, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        rows = _rows(self.gram)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise MalformedInput(f"gram row {i} has {len(row)} entries, expected {n}")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise MalformedInput(f"gram is not symmetric at ({i}, {j})")
        object.__setattr__(self, 'gram', tuple(tuple(row) for row in rows))

    @classmethod
    def from_rows(cls, rows) -> "GramLattice":
        return cls(tuple(tuple(int(x) for x in row) for row in _rows(rows)))

    @classmethod
    def diagonal(cls, entries: Iterable[int]) -> "GramLattice":
        entries = list(entries)
        n = len(entries)
        return cls.from_rows([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_text(cls, text: str) -> "GramLattice":
        tokens = text.split()
        if not tokens:
            raise MalformedInput("empty Gram file")
        try:
            values = [int(tok) for tok in tokens]
        except ValueError as e:
            raise MalformedInput(f"non-integer token in Gram file: {e}")
        n = values[0]
        if n < 0:
            raise MalformedInput(f"negative dimension {n}")
        if len(values) - 1 != n * n:
            raise MalformedInput(f"expected {n * n} entries after header, got {len(values) - 1}")
        body = values[1:]
        return cls.from_rows([body[i * n:(i + 1) * n] for i in range(n)])

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "GramLattice":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        lines = [str(self.rank)] + [" ".join(str(x) for x in row) for row in self.gram]
        return "\n".join(lines) + "\n"

    @property
    def rank(self) -> int:
        return len(self.gram)

    def rows(self) -> IntMatrix:
        return [list(row) for row in self.gram]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.rows(), dtype=object).reshape(self.rank, self.rank)

    @property
    def matrix(self) -> sympy.Matrix:
        if not self.rank:
            return sympy.zeros(0, 0)
        return sympy.Matrix(self.rows())

    def pair(self, x: Sequence[int], y: Sequence[int]) -> int:
        return sum(x[i] * self.gram[i][j] * y[j]
                   for i in range(self.rank) for j in range(self.rank) if x[i] and y[j])

    def norm(self, x: Sequence[int]) -> int:
        return self.pair(x, x)

    def induced(self, basis) -> "GramLattice":
        return GramLattice.from_rows(congruent(self.rows(), _rows(basis)))

    def direct_sum(self, other: "GramLattice") -> "GramLattice":
        n, m = self.rank, other.rank
        rows = [list(r) + [0] * m for r in self.gram] + [[0] * n + list(r) for r in other.gram]
        return GramLattice.from_rows(rows)

    def rescale(self, m: int) -> "GramLattice":
        return GramLattice.from_rows([[m * x for x in row] for row in self.gram])

    def profile(self) -> LatticeProfile:
        return lattice_profile(self)

    def __str__(self):
        return "\n".join(" ".join(f"{x:>4}" for x in row) for row in self.gram) or "(empty)"


def congruence_diagonal(G: GramLattice) -> List[Fraction]:
    """Diagonalise G by exact symmetric congruence; returns the diagonal"""
    n = G.rank
    A = [[Fraction(x) for x in row] for row in G.gram]
    diagonal = []
    for t in range(n):
        p = next((i for i in range(t, n) if A[i][i] != 0), None)
        if p is None:
            pair = next(((i, j) for i in range(t, n) for j in range(i + 1, n) if A[i][j] != 0), None)
            if pair is None:
                diagonal.extend([Fraction(0)] * (n - t))
                break
            i, j = pair
            # row_i += row_j, col_i += col_j puts 2·A[i][j] on the diagonal
            for c in range(n):
                A[i][c] += A[j][c]
            for r in range(n):
                A[r][i] += A[r][j]
            p = i
        if p != t:
            A[t], A[p] = A[p], A[t]
            for row in A:
                row[t], row[p] = row[p], row[t]
        pivot = A[t][t]
        # Schur complement of the pivot
        for r in range(t + 1, n):
            if A[r][t] != 0:
                f = A[r][t] / pivot
                for c in range(t + 1, n):
                    A[r][c] -= f * A[t][c]
        for r in range(t + 1, n):
            A[r][t] = A[t][r] = Fraction(0)
        diagonal.append(pivot)
    return diagonal


def lattice_profile(G: GramLattice) -> LatticeProfile:
    """Rank, signature, determinant, parity and discriminant group of G"""
    diagonal = congruence_diagonal(G)
    pos = sum(1 for d in diagonal if d > 0)
    neg = sum(1 for d in diagonal if d < 0)
    zero = G.rank - pos - neg

    det = Fraction(1)
    for d in diagonal:
        det *= d
    if det.denominator != 1:
        raise ComputationError(f"non-integral determinant {det}")
    det = int(det)

    even = all(G.gram[i][i] % 2 == 0 for i in range(G.rank))

    factors: Tuple[int, ...] = ()
    p_elementary = None
    if zero == 0 and G.rank:
        factors = tuple(d for d in invariant_factors(G.rows()) if d > 1)
        if factors and factors[0] == factors[-1] and sympy.isprime(factors[0]):
            p_elementary = (factors[0], len(factors))

    return LatticeProfile(
        rank=G.rank,
        signature=(pos, zero, neg),
        det=det,
        even=even,
        disc_invariant_factors=factors,
        p_elementary=p_elementary,
    )


# ----------------------------------------------------------------------------
# Sublattices
# ----------------------------------------------------------------------------

def is_primitive_sublattice(B) -> bool:
    """True iff ℤⁿ / span(rows of B) is torsion-free"""
    rows = _rows(B)
    if not rows:
        return True
    if matrix_rank(rows) < len(rows):
        raise DependentRows(f"basis has rank {matrix_rank(rows)} < {len(rows)} rows")
    return all(d == 1 for d in invariant_factors(rows))


@dataclass(frozen=True)
class Embedding:
    """Sublattice of an ambient lattice given by basis rows in ambient coordinates"""

    ambient: GramLattice
    basis: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = _rows(self.basis)
        for i, row in enumerate(rows):
            if len(row) != self.ambient.rank:
                raise MalformedInput(f"basis row {i} has length {len(row)}, ambient rank is {self.ambient.rank}")
        if rows and matrix_rank(rows) < len(rows):
            raise DependentRows("embedding basis rows are linearly dependent")
        object.__setattr__(self, 'basis', tuple(tuple(r) for r in rows))

    def induced(self) -> GramLattice:
        return self.ambient.induced(self.basis)

    def is_primitive(self) -> bool:
        return is_primitive_sublattice(self.basis)

    def complement(self) -> Tuple[IntMatrix, GramLattice]:
        return orthogonal_complement(self.ambient, self.basis)


def orthogonal_complement(amb: GramLattice, B) -> Tuple[IntMatrix, GramLattice]:
    """Saturated basis of {x : B·G·x = 0} and its induced Gram"""
    rows = _rows(B)
    n = amb.rank
    if amb.profile().signature[1]:
        raise DegenerateAmbient("orthogonal complement needs a nondegenerate ambient lattice")
    if not rows:
        return identity(n), amb
    constraints = matmul(rows, amb.rows())
    basis = saturated_kernel(constraints, n)
    logger.debug("complement of a rank-%d sublattice in rank %d: %d basis vectors",
                 len(rows), n, len(basis))
    return basis, amb.induced(basis)


@dataclass(frozen=True)
class ImageLattice:
    """Generator lattice modulo the radical of its form"""

    projection: Tuple[Tuple[int, ...], ...]
    lifts: Tuple[Tuple[int, ...], ...]
    induced: GramLattice
    radical: Tuple[Tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return self.induced.rank

    def coordinates(self, generator_vector: Sequence[int]) -> List[int]:
        """Image of a generator-coordinate vector in the quotient basis"""
        return [sum(p * x for p, x in zip(row, generator_vector)) for row in self.projection]


def image_lattice(G: GramLattice) -> ImageLattice:
    """Quotient of the generator lattice by the radical, with its nondegenerate form"""
    n = G.rank
    D, _, V, Vinv = _snf(G.rows(), n)
    r = sum(1 for i in range(n) if D[i][i])
    if r == n:
        eye = identity(n)
        return ImageLattice(tuple(map(tuple, eye)), tuple(map(tuple, eye)), G, ())

    projection = [Vinv[i][:] for i in range(r)]
    lifts = [[V[row][c] for row in range(n)] for c in range(r)]
    radical = [[V[row][c] for row in range(n)] for c in range(r, n)]
    induced = G.induced(lifts)
    logger.debug("image lattice: %d generators, radical rank %d", n, n - r)
    return ImageLattice(
        projection=tuple(map(tuple, projection)),
        lifts=tuple(map(tuple, lifts)),
        induced=induced,
        radical=tuple(tuple(_positive_leading(row)) for row in radical),
    )


# ----------------------------------------------------------------------------
# Rudakov–Shafarevich uniqueness certificate
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RSCertificate:
    """Data determining an even hyperbolic odd-p-elementary lattice of rank ≥ 3"""

    p: int
    ell: int
    rank: int
    signature: Tuple[int, int]

    def to_dict(self) -> dict:
        return {'p': self.p, 'ell': self.ell, 'rank': self.rank, 'signature': list(self.signature)}


def rudakov_shafarevich_certificate(G: GramLattice) -> Optional[RSCertificate]:
    profile = lattice_profile(G)
    if profile.rank < 3 or not profile.even:
        return None
    if profile.signature != (1, 0, profile.rank - 1):
        return None
    if profile.p_elementary is None or profile.p_elementary[0] == 2:
        return None
    p, ell = profile.p_elementary
    return RSCertificate(p=p, ell=ell, rank=profile.rank, signature=(1, profile.rank - 1))
