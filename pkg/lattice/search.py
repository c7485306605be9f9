#!/usr/bin/env python3
"""Bounded searches on Gram lattices.

Both searches are exhaustive only inside their coordinate box: an empty
answer is evidence, not proof.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterator, List, Optional, Tuple

import numpy as np
import sympy

from lattice.gram import GramLattice, IntMatrix, lattice_profile, matmul, transpose
from utils.errors import (ComputationError, ComputationOverflow, MalformedInput, RankMismatch,
                          SearchTooLarge)
from utils.settings import get_settings

logger = logging.getLogger(__name__)

INT64_HEADROOM = 2 ** 62
MAX_BOX = 50_000_000
CHUNK = 1 << 18


def _box_chunks(n: int, bound: int) -> Iterator[np.ndarray]:
    """All integer vectors in [-bound, bound]^n, in lexicographic chunks"""
    base = 2 * bound + 1
    total = base ** n
    if total > MAX_BOX:
        raise SearchTooLarge(f"box [-{bound}, {bound}]^{n} has {total} points (limit {MAX_BOX})")
    powers = np.array([base ** (n - 1 - k) for k in range(n)], dtype=np.int64)
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % base - bound


def represent(G: GramLattice, value: int, bound: Optional[int] = None) -> List[Tuple[int, ...]]:
    """All nonzero v in the box [-bound, bound]^n with vᵀGv = value"""
    if bound is None:
        bound = get_settings().represent_bound
    if bound < 0:
        raise MalformedInput(f"bound must be >= 0, got {bound}")
    n = G.rank
    if n == 0 or bound == 0:
        return []

    weight = sum(abs(x) for row in G.gram for x in row)
    if bound * bound * weight >= INT64_HEADROOM or abs(value) >= INT64_HEADROOM:
        raise ComputationOverflow(
            f"box search would exceed 64-bit range (bound {bound}, entry weight {weight})")

    gram = np.array(G.rows(), dtype=np.int64)
    found: List[Tuple[int, ...]] = []
    for vectors in _box_chunks(n, bound):
        norms = np.einsum('ki,ij,kj->k', vectors, gram, vectors)
        hits = vectors[(norms == value) & np.any(vectors != 0, axis=1)]
        found.extend(tuple(int(x) for x in row) for row in hits)
    logger.debug("represent %d in rank %d box %d: %d vectors", value, n, bound, len(found))
    return found


def _same_profile(G1: GramLattice, G2: GramLattice) -> bool:
    p1, p2 = lattice_profile(G1), lattice_profile(G2)
    return (p1.det == p2.det and p1.signature == p2.signature and p1.even == p2.even
            and p1.disc_invariant_factors == p2.disc_invariant_factors)


@dataclass(frozen=True)
class IsometrySearch:
    """Outcome of an isometry search; within_bound is False for a transform found outside the box"""

    transform: Optional[IntMatrix]
    bound: int
    within_bound: bool = True

    @property
    def isometric(self) -> bool:
        return self.transform is not None

    def to_dict(self) -> dict:
        return {'isometric': self.isometric, 'transform': self.transform, 'bound': self.bound,
                'within_bound': self.within_bound}


def _max_entry(U: IntMatrix) -> int:
    return max((abs(x) for row in U for x in row), default=0)


def find_isometry(G1: GramLattice, G2: GramLattice, bound: Optional[int] = None,
                  reduce: bool = True) -> IsometrySearch:
    """Exhaustive search in the box [-bound, bound] first.

    When the box holds no isometry and reduce is set, anisotropic binary forms
    are matched through their Gauss-reduced forms; such a transform may lie
    outside the box and is flagged with within_bound=False.
    """
    if G1.rank != G2.rank:
        raise RankMismatch(f"ranks differ: {G1.rank} vs {G2.rank}")
    if bound is None:
        bound = get_settings().isometry_bound
    if bound < 1:
        raise MalformedInput(f"bound must be >= 1, got {bound}")

    n = G1.rank
    if G1 == G2:
        return IsometrySearch([[1 if i == j else 0 for j in range(n)] for i in range(n)], bound)
    if not _same_profile(G1, G2):
        logger.debug("isometry fast-reject: profiles differ")
        return IsometrySearch(None, bound)

    U = _column_search(G1, G2, bound)
    if U is not None:
        return IsometrySearch(U, bound)
    if reduce and n == 2 and _anisotropic(G1):
        U = _binary_isometry(G1, G2, bound)
        if U is not None:
            largest = _max_entry(U)
            logger.info("binary forms isometric through reduction, largest entry %d (bound %d)",
                        largest, bound)
            return IsometrySearch(U, bound, within_bound=largest <= bound)
    return IsometrySearch(None, bound)


def is_isometric_bounded(G1: GramLattice, G2: GramLattice,
                         bound: Optional[int] = None) -> Optional[IntMatrix]:
    """Unimodular U with entries in [-bound, bound] and Uᵀ·G1·U = G2, if one exists"""
    return find_isometry(G1, G2, bound, reduce=False).transform


def _anisotropic(G: GramLattice) -> bool:
    (a, b), (_, c) = G.gram
    det = a * c - b * b
    return det > 0 or (det < 0 and isqrt(-det) ** 2 != -det)


def _binary_isometry(G1: GramLattice, G2: GramLattice, bound: int) -> Optional[IntMatrix]:
    # the bound applies between the reduced forms, not to the composed transform
    R1, T1 = reduce_binary_form(G1)
    R2, T2 = reduce_binary_form(G2)
    V = [[1, 0], [0, 1]] if R1 == R2 else _column_search(R1, R2, bound)
    if V is None:
        return None
    (p, q), (r, s) = T2
    det = p * s - q * r
    T2_inv = [[s * det, -q * det], [-r * det, p * det]]
    U = matmul(matmul(T1, V), T2_inv)
    logger.debug("binary isometry via reduced forms %s and %s", R1.gram, R2.gram)
    return _checked(G1, G2, U)


def _checked(G1: GramLattice, G2: GramLattice, U: IntMatrix) -> IntMatrix:
    n = G1.rank
    if matmul(matmul(transpose(U, n), G1.rows()), U) != G2.rows():
        raise ComputationError("isometry search produced an inconsistent transform")
    return U


def _column_search(G1: GramLattice, G2: GramLattice, bound: int) -> Optional[IntMatrix]:
    """Depth-first search for the columns of U, pruning on the partial Gram"""
    n = G1.rank
    target = G2.gram
    candidates = [represent(G1, target[i][i], bound) for i in range(n)]
    if any(not c for c in candidates):
        return None

    columns: List[Tuple[int, ...]] = []

    def extend(i: int) -> bool:
        if i == n:
            U = transpose([list(c) for c in columns], n)
            return abs(sympy.Matrix(U).det()) == 1
        for v in candidates[i]:
            if all(G1.pair(columns[j], v) == target[j][i] for j in range(i)):
                columns.append(v)
                if extend(i + 1):
                    return True
                columns.pop()
        return False

    if not extend(0):
        return None
    return _checked(G1, G2, transpose([list(c) for c in columns], n))


def reduce_binary_form(G: GramLattice) -> Tuple[GramLattice, IntMatrix]:
    """Gauss-reduce a nondegenerate rank-2 form without isotropic vectors.

    Returns (reduced, T) with Tᵀ·G·T = reduced, |b| <= |a|/2 and |a| <= |c|.
    """
    if G.rank != 2:
        raise RankMismatch(f"binary form reduction needs rank 2, got {G.rank}")
    (a, b), (_, c) = G.gram
    det = a * c - b * b
    if det == 0:
        raise MalformedInput("binary form is degenerate")
    if det < 0 and isqrt(-det) ** 2 == -det:
        raise MalformedInput("binary form represents zero; reduction needs an anisotropic form")

    T = [[1, 0], [0, 1]]
    while True:
        k = round(Fraction(b, a))
        if k:
            c = c - 2 * k * b + k * k * a
            b = b - k * a
            for row in T:
                row[1] -= k * row[0]
        if abs(c) < abs(a):
            a, c = c, a
            for row in T:
                row[0], row[1] = row[1], row[0]
            continue
        break
    return GramLattice.from_rows([[a, b], [b, c]]), T
