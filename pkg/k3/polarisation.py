#!/usr/bin/env python3
"""Polarising lattices inside the K3 lattice and their transcendental complements.

The K3 lattice L = 2E8(-1) ⊥ 3U is even, unimodular, of signature (3, 19).
For a primitive N ⊂ L the complement T = N⊥ has rank 22 - rank N, the
complementary signature and a discriminant group isomorphic to that of N,
so everything here is decided from profiles without building an embedding.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

from lattice.gram import (GramLattice, ImageLattice, LatticeProfile, RSCertificate,
                          image_lattice, lattice_profile, orthogonal_complement,
                          rudakov_shafarevich_certificate)
from lattice.search import reduce_binary_form
from lattice.standard import SPEC_NODES, LatticeSpec, standard_lattice
from utils.errors import MalformedInput, NoE8Found, NotEmbeddable, OddDegree

logger = logging.getLogger(__name__)

K3_RANK = 22
K3_SIGNATURE = (3, 19)


@dataclass(frozen=True)
class PolarisingLattice:
    """Lattice N with a distinguished class A, A² = 2g - 2 > 0"""

    N: GramLattice
    distinguished_class: Tuple[int, ...]

    def __post_init__(self):
        A = tuple(int(x) for x in self.distinguished_class)
        if len(A) != self.N.rank:
            raise MalformedInput(f"class has {len(A)} coordinates, lattice rank is {self.N.rank}")
        object.__setattr__(self, 'distinguished_class', A)
        square = self.N.norm(A)
        if square <= 0:
            raise MalformedInput(f"distinguished class must have positive square, got {square}")
        if square % 2:
            raise OddDegree(f"distinguished class square {square} is odd")

    @property
    def degree(self) -> int:
        return self.N.norm(self.distinguished_class)

    @property
    def genus(self) -> int:
        return self.degree // 2 + 1

    def is_hyperbolic(self) -> bool:
        return lattice_profile(self.N).signature == (1, 0, self.N.rank - 1)


@dataclass(frozen=True)
class ComplementProfile:
    """Forced rank, signature and discriminant of T = N⊥ in the K3 lattice"""

    rank: int
    signature: Tuple[int, int, int]
    disc_invariant_factors: Tuple[int, ...]

    @property
    def even(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {
            'rank': self.rank,
            'signature': list(self.signature),
            'disc_invariant_factors': list(self.disc_invariant_factors),
        }


ProfileLike = Union[GramLattice, LatticeProfile, ComplementProfile]


def _profile_of(x: ProfileLike):
    if isinstance(x, GramLattice):
        return lattice_profile(x)
    if isinstance(x, (LatticeProfile, ComplementProfile)):
        return x
    raise MalformedInput(f"expected a lattice or a profile, got {type(x).__name__}")


def complement_profile(N: ProfileLike) -> ComplementProfile:
    profile = _profile_of(N)
    pos, zero, neg = profile.signature
    if zero:
        raise NotEmbeddable("degenerate lattices have no primitive K3 complement")
    if not profile.even:
        raise NotEmbeddable("odd lattice cannot embed in the even K3 lattice")
    if profile.rank > K3_RANK:
        raise NotEmbeddable(f"rank {profile.rank} exceeds {K3_RANK}")
    if pos > K3_SIGNATURE[0] or neg > K3_SIGNATURE[1]:
        raise NotEmbeddable(f"signature ({pos}, {neg}) does not fit in {K3_SIGNATURE}")

    rank = K3_RANK - profile.rank
    factors = tuple(profile.disc_invariant_factors)
    if len(factors) > rank:
        raise NotEmbeddable(
            f"discriminant needs {len(factors)} generators but the complement has rank {rank}")
    return ComplementProfile(
        rank=rank,
        signature=(K3_SIGNATURE[0] - pos, 0, K3_SIGNATURE[1] - neg),
        disc_invariant_factors=factors,
    )


@dataclass
class VerificationReport:
    """Outcome of comparing a lattice against a claimed decomposition"""

    verdict: str
    left: dict
    right: dict
    differences: List[str] = field(default_factory=list)
    certificate: Optional[RSCertificate] = None

    @property
    def isometric(self) -> bool:
        return self.verdict == "isometric"

    def to_dict(self) -> dict:
        return {
            'verdict': self.verdict,
            'left': self.left,
            'right': self.right,
            'differences': self.differences,
            'certificate': self.certificate.to_dict() if self.certificate else None,
        }


def verify_polarising_decomposition(N: ProfileLike,
                                    claimed: Union[LatticeSpec, str, ProfileLike]) -> VerificationReport:
    """Compare N with a claimed lattice; isometry only on equal uniqueness certificates"""
    if isinstance(claimed, (str,) + SPEC_NODES):
        claimed = standard_lattice(claimed)
    left, right = _profile_of(N), _profile_of(claimed)

    differences = []
    if left.rank != right.rank:
        differences.append("rank")
    if left.signature != right.signature:
        differences.append("signature")
    if left.even != right.even:
        differences.append("parity")
    if tuple(left.disc_invariant_factors) != tuple(right.disc_invariant_factors):
        differences.append("discriminant")

    certificate = None
    if not differences and isinstance(N, GramLattice) and isinstance(claimed, GramLattice):
        c1 = rudakov_shafarevich_certificate(N)
        c2 = rudakov_shafarevich_certificate(claimed)
        if c1 is not None and c1 == c2:
            certificate = c1

    if differences:
        verdict = "profiles differ"
    elif certificate is not None:
        verdict = "isometric"
    else:
        verdict = "profiles match"
    logger.info("polarising decomposition: %s %s", verdict, differences or "")
    return VerificationReport(verdict, left.to_dict(), right.to_dict(), differences, certificate)


@dataclass(frozen=True)
class E8Extraction:
    """Eight generator classes spanning E8(-1) and the complement of their span"""

    subset: Tuple[int, ...]
    image: ImageLattice
    e8_basis: Tuple[Tuple[int, ...], ...]
    complement_basis: Tuple[Tuple[int, ...], ...]
    complement_gram: GramLattice


def _spans_e8(sub: GramLattice) -> bool:
    # rank 8, even, negative definite and unimodular characterises E8(-1)
    if any(sub.gram[i][i] % 2 for i in range(sub.rank)):
        return False
    profile = lattice_profile(sub)
    return profile.signature == (0, 0, 8) and profile.det == 1


def extract_e8_and_complement(curves: GramLattice,
                              generators: Optional[Sequence[int]] = None) -> E8Extraction:
    """Split the image of a curve configuration as E8(-1) ⊥ complement"""
    if curves.rank > K3_RANK:
        raise MalformedInput(f"curve configuration of rank {curves.rank} exceeds {K3_RANK}")
    image = image_lattice(curves)

    if generators is not None:
        subsets = [tuple(int(i) for i in generators)]
        if len(subsets[0]) != 8 or any(not 0 <= i < curves.rank for i in subsets[0]):
            raise MalformedInput(f"expected 8 generator indices below {curves.rank}, got {subsets[0]}")
    else:
        subsets = combinations(range(curves.rank), 8)

    subset = next((s for s in subsets if _spans_e8(curves.induced(
        [[1 if j == i else 0 for j in range(curves.rank)] for i in s]))), None)
    if subset is None:
        raise NoE8Found(f"no 8 of the {curves.rank} generators span E8(-1)")

    e8_basis = [image.coordinates([1 if j == i else 0 for j in range(curves.rank)]) for i in subset]
    basis, gram = orthogonal_complement(image.induced, e8_basis)
    if gram.rank == 2:
        gram, basis = _reduced(gram, basis)
    logger.info("E8(-1) from generators %s; complement rank %d", subset, gram.rank)
    return E8Extraction(
        subset=tuple(subset),
        image=image,
        e8_basis=tuple(map(tuple, e8_basis)),
        complement_basis=tuple(map(tuple, basis)),
        complement_gram=gram,
    )


def _reduced(gram: GramLattice, basis) -> Tuple[GramLattice, list]:
    try:
        reduced, T = reduce_binary_form(gram)
    except MalformedInput:
        return gram, basis
    # new basis rows are Tᵀ·(old rows)
    rows = [[sum(T[k][c] * basis[k][j] for k in range(2)) for j in range(len(basis[0]))]
            for c in range(2)]
    return reduced, rows


def theorem_quartic_checks(e: int, sigma: int, has_planes: Optional[bool] = None) -> List[str]:
    """Validation rules for nodal quartic blocks; returns the violated rules"""
    violations = []
    if e < 0 or sigma < 0:
        violations.append("node count and defect must be non-negative")
    if e > 45:
        violations.append(f"a nodal quartic has at most 45 nodes, got {e}")
    if sigma > 15:
        violations.append(f"defect of a nodal quartic is at most 15, got {sigma}")
    if e < 9 and sigma:
        violations.append(f"fewer than 9 nodes forces defect 0, got {sigma}")
    if e == 9 and sigma > 1:
        violations.append(f"9 nodes allow defect at most 1, got {sigma}")
    if has_planes is False:
        if e < 12 and sigma:
            violations.append(f"without planes, fewer than 12 nodes forces defect 0, got {sigma}")
        if sigma > 10:
            violations.append(f"without planes the defect is at most 10, got {sigma}")
    return violations
