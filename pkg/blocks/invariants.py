#!/usr/bin/env python3
"""Closed numeric formulas for weak Fano 3-folds and the building blocks made from them.

Degrees are anticanonical throughout: the degree of a Fano is (-K)^3 and the
degree of a curve C is -K_W.C, never the degree in some projective embedding.
"""

import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from lattice.gram import GramLattice, smith_normal_form
from utils.errors import (InconsistentC2, InconsistentReport, MalformedInput, NegativeBetti,
                          NegativeDefect, NonFanoWarning, NonIntegralChi, OddDegree,
                          RankNullityViolation, TorsionUnknown)

logger = logging.getLogger(__name__)

K3_RANK = 22


@dataclass(frozen=True)
class GenusDegree:
    g: int
    h0_antiK: int


def genus_degree(degree: int) -> GenusDegree:
    """Genus g and h0(-K) from -K^3 = 2g - 2"""
    if degree % 2:
        raise OddDegree(f"anticanonical degree {degree} is odd")
    if degree <= 0:
        raise MalformedInput(f"anticanonical degree must be positive, got {degree}")
    g = degree // 2 + 1
    return GenusDegree(g=g, h0_antiK=g + 2)


def riemann_roch_3fold(L3: int, L2K: int, L_K2_plus_c2: int, Kc2: int) -> Fraction:
    """χ(L) = L³/6 - L²K/4 + L(K² + c₂)/12 - K·c₂/24"""
    chi = (Fraction(L3, 6) - Fraction(L2K, 4) + Fraction(L_K2_plus_c2, 12) - Fraction(Kc2, 24))
    if chi.denominator != 1:
        warnings.warn(f"Euler characteristic {chi} is not an integer", NonIntegralChi)
    return chi


@dataclass(frozen=True)
class FanoDescriptor:
    """Numerical data of a (weak) Fano 3-fold"""

    name: str
    rank: int
    index: int
    degree: int
    b3: int
    h21: Optional[int] = None
    torsion_free_h3: bool = True

    def __post_init__(self):
        if self.rank < 1:
            raise MalformedInput(f"{self.name}: Picard rank must be >= 1, got {self.rank}")
        if self.index < 1:
            raise MalformedInput(f"{self.name}: index must be >= 1, got {self.index}")
        genus_degree(self.degree)
        if self.b3 < 0 or self.b3 % 2:
            raise MalformedInput(f"{self.name}: b3 must be even and non-negative, got {self.b3}")
        if self.h21 is not None and self.b3 != 2 * self.h21:
            raise MalformedInput(f"{self.name}: b3 = {self.b3} but 2·h21 = {2 * self.h21}")
        if self.index > 1 and self.degree % self.index ** 3:
            raise MalformedInput(
                f"{self.name}: degree {self.degree} is not divisible by index³ = {self.index ** 3}")

    @property
    def genus(self) -> int:
        return genus_degree(self.degree).g


@dataclass(frozen=True)
class BlowupSpec:
    """Centre of a blow-up: a smooth curve (genus, -K_W·C) or a point"""

    kind: str
    genus: int = 0
    degree: int = 0

    @classmethod
    def curve(cls, genus: int, degree: int) -> "BlowupSpec":
        if genus < 0:
            raise MalformedInput(f"curve genus must be >= 0, got {genus}")
        if degree < 0:
            logger.warning("blowing up a curve with -K.C = %d < 0", degree)
        return cls("curve", genus, degree)

    @classmethod
    def point(cls) -> "BlowupSpec":
        return cls("point")


@dataclass(frozen=True)
class BlowupNumbers:
    degree_Y: int
    K2E: int
    KE2: int
    E3: int
    b3_Y: int
    genus_Y: int
    picard_gram: Optional[GramLattice] = None


def blowup_numbers(W: FanoDescriptor, spec: BlowupSpec) -> BlowupNumbers:
    """Intersection numbers of the blow-up Y of W along a curve or at a point.

    K2E is (-K_Y)²·E, KE2 is (-K_Y)·E²; the Gram is q = -K_Y·D1·D2 in the
    basis (E, -K_Y) and is only produced when W has Picard rank 1.
    """
    if spec.kind == "curve":
        g, d = spec.genus, spec.degree
        degree_Y = W.degree - 2 * d - 2 + 2 * g
        K2E, KE2, E3 = d + 2 - 2 * g, 2 * g - 2, -d + 2 - 2 * g
        b3_Y = W.b3 + 2 * g
        genus_Y = W.genus + g - d - 1
    elif spec.kind == "point":
        degree_Y = W.degree - 8
        K2E, KE2, E3 = 4, -2, 1
        b3_Y = W.b3
        genus_Y = W.genus - 4
    else:
        raise MalformedInput(f"unknown blow-up centre {spec.kind!r}")

    if degree_Y <= 0:
        warnings.warn(f"blow-up of {W.name} has (-K)³ = {degree_Y}; -K is not big",
                      NonFanoWarning)
    gram = None
    if W.rank == 1:
        gram = GramLattice.from_rows([[KE2, K2E], [K2E, degree_Y]])
    return BlowupNumbers(degree_Y, K2E, KE2, E3, b3_Y, genus_Y, gram)


@dataclass(frozen=True)
class NamikawaBound:
    bound: int
    ok: bool


def namikawa_check(h21_Xt: int, rho_Xt: int, e: int, mu_list: Sequence[int] = ()) -> NamikawaBound:
    """Bound h21(X_t) + 20 - ρ(X_t) on e + Σμ for a smoothable Fano"""
    if e < 0 or any(mu < 0 for mu in mu_list):
        raise MalformedInput("node count and μ invariants must be non-negative")
    bound = h21_Xt + 20 - rho_Xt
    return NamikawaBound(bound=bound, ok=e + sum(mu_list) <= bound)


@dataclass(frozen=True)
class SmoothingData:
    """Betti numbers of a singular Fano X and its smoothing X_t"""

    b3_X: int
    b3_Xt: int
    milnor_numbers: Tuple[int, ...] = ()
    mu_invariants: Tuple[int, ...] = ()

    def __post_init__(self):
        if any(m < 1 for m in self.milnor_numbers):
            raise MalformedInput(f"Milnor numbers must be >= 1, got {list(self.milnor_numbers)}")
        if any(mu < 0 for mu in self.mu_invariants):
            raise MalformedInput(f"μ invariants must be >= 0, got {list(self.mu_invariants)}")


def defect(sm: SmoothingData, e: Optional[int] = None) -> int:
    """σ(X) = b3(X) - b3(X_t) + Σ m_P; without Milnor numbers all e points are nodes"""
    if sm.milnor_numbers:
        total = sum(sm.milnor_numbers)
    elif e is not None:
        total = e
    else:
        raise MalformedInput("need either Milnor numbers or the node count")
    sigma = sm.b3_X - sm.b3_Xt + total
    if sigma < 0:
        raise NegativeDefect(
            f"b3(X) = {sm.b3_X}, b3(X_t) = {sm.b3_Xt}, Σm = {total} give defect {sigma}")
    return sigma


def betti3_semifano(b: int, e: int, sigma: int) -> int:
    """b3(Y) = b - 2e + 2σ for a small resolution Y of a nodal Fano with smoothing b3 = b"""
    b3_Y = b - 2 * e + 2 * sigma
    if b3_Y < 0:
        raise NegativeBetti(f"b = {b}, e = {e}, σ = {sigma} give b3(Y) = {b3_Y}")
    return b3_Y


def betti3_nodal(b3_X: int, e: int, sigma: int) -> int:
    """b3(X) - e + σ, the same number from the singular Fano's side"""
    b3_Y = b3_X - e + sigma
    if b3_Y < 0:
        raise NegativeBetti(f"b3(X) = {b3_X}, e = {e}, σ = {sigma} give b3(Y) = {b3_Y}")
    return b3_Y


@dataclass(frozen=True)
class BlockCohomology:
    b2_Z: int
    b3_Z: int
    k: int
    rank_N0: int
    rank_K0: int
    rank_N: Optional[int] = None
    rank_K: Optional[int] = None

    @property
    def constraint(self) -> str:
        return f"(rank N - {self.rank_N0}) + (rank K - {self.rank_K0}) = {self.k - 1}"


def block_cohomology(b2_Y: int, b3_Y: int, genera: Sequence[int],
                     rank_N0: Optional[int] = None,
                     rank_N: Optional[int] = None) -> BlockCohomology:
    """Betti numbers of Z = Bl_C Y for a base curve with components of the given genera.

    rank_N0 is the rank of the image of H²(Y) in H²(S); it defaults to b2(Y),
    which holds for semi-Fanos. With one component N is that image.
    """
    k = len(genera)
    if k < 1:
        raise MalformedInput("base curve needs at least one component")
    if any(g < 0 for g in genera):
        raise MalformedInput(f"component genera must be >= 0, got {list(genera)}")
    if rank_N0 is None:
        rank_N0 = b2_Y
    rank_K0 = b2_Y - rank_N0
    if rank_K0 < 0:
        raise RankNullityViolation(f"image rank {rank_N0} exceeds b2(Y) = {b2_Y}")

    if rank_N is None and k == 1:
        rank_N = rank_N0
    rank_K = None
    if rank_N is not None:
        rank_K = rank_K0 + (k - 1) - (rank_N - rank_N0)
        if rank_N < rank_N0 or rank_K < 0:
            raise RankNullityViolation(
                f"rank N = {rank_N} is incompatible with rank N0 = {rank_N0} and k = {k}")

    return BlockCohomology(
        b2_Z=b2_Y + k,
        b3_Z=b3_Y + 2 * sum(genera),
        k=k,
        rank_N0=rank_N0,
        rank_K0=rank_K0,
        rank_N=rank_N,
        rank_K=rank_K,
    )


def c2_restriction(c2_D: int, c1sq_D: int, q_DD: int, q_DA: int) -> int:
    """(c2(Y) + c1(Y)²)·D for a smooth surface D from its own Chern numbers"""
    return (c2_D - c1sq_D) + (-q_DD + 2 * q_DA)


def flop_update(c2_restr_D: int, D3_minus_D3plus: int,
                gram: Optional[GramLattice] = None,
                gram_flopped: Optional[GramLattice] = None) -> int:
    """(c2 + c1²)·D⁺ on the flopped 3-fold"""
    if gram is not None and gram_flopped is not None and gram != gram_flopped:
        raise InconsistentReport("a flop must preserve the anticanonical Gram")
    return c2_restr_D + 2 * D3_minus_D3plus


def anticanonical_c2_pairing(degree: int) -> int:
    """(c2 + c1²)·(-K) = -K·c2 + (-K)³ = 24 + degree"""
    return 24 + degree


def div_c2_bounds(degree: int, index: int = 1) -> Tuple[int, int]:
    """Lower and upper bound on div c2(Z): 2 and gcd((24 + (-K)³)/r, 24)"""
    numerator = anticanonical_c2_pairing(degree)
    if numerator % index:
        raise InconsistentC2(f"24 + (-K)³ = {numerator} is not divisible by the index {index}")
    upper = gcd(numerator // index, 24)
    if upper % 2:
        raise InconsistentC2(f"div c2 bound {upper} is odd")
    return 2, upper


def fibre_coefficients(degree: int, steps: Sequence[int]) -> List[int]:
    """Coefficients of the exceptional fibre classes in c2(Z).

    steps are the K³ values of the intermediate blow-ups Z_1 ... Z_{k-1};
    fibre i carries K³(Z_{i-1}) - K³(Z_i) with Z_0 = Y and K³(Z_k) = 0.
    """
    chain = [-degree] + [int(s) for s in steps] + [0]
    return [chain[i] - chain[i + 1] for i in range(len(chain) - 1)]


def divisibility_modulo(values: Sequence[int], relations: Sequence[Sequence[int]],
                        cap: int = 24) -> int:
    """Largest d dividing cap with values ∈ dℤⁿ + span(relations)"""
    n = len(values)
    if any(len(r) != n for r in relations):
        raise MalformedInput(f"relations must have {n} coordinates")
    if relations:
        D, _, V = smith_normal_form([list(r) for r in relations], n)
        factors = [D[i][i] if i < len(D) else 0 for i in range(n)]
        coords = [sum(values[r] * V[r][c] for r in range(n)) for c in range(n)]
    else:
        factors, coords = [0] * n, list(values)
    for d in sorted((d for d in range(1, cap + 1) if cap % d == 0), reverse=True):
        if all(x % gcd(d, f) == 0 for x, f in zip(coords, factors)):
            return d
    return 1


@dataclass(frozen=True)
class AcylProfile:
    """Betti numbers of the ACyl 3-fold V = Z \\ S and its lattice data"""

    b_V: Tuple[int, int, int, int, int]
    rank_N: int
    rank_K: int
    rank_T: int
    N_gram: GramLattice
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'b_V': list(self.b_V),
            'rank_N': self.rank_N,
            'rank_K': self.rank_K,
            'rank_T': self.rank_T,
            'N_gram': self.N_gram.rows(),
        }


def acyl_profile(b2_Z: int, b3_Z: int, N: GramLattice, rank_K: int) -> AcylProfile:
    if rank_K < 0 or rank_K + N.rank != b2_Z - 1:
        raise RankNullityViolation(
            f"rank K + rank N = {rank_K} + {N.rank} but b2(Z) - 1 = {b2_Z - 1}")
    if N.rank > K3_RANK:
        raise RankNullityViolation(f"rank N = {N.rank} exceeds {K3_RANK}")
    rank_T = K3_RANK - N.rank
    b_V = (0, b2_Z - 1, b3_Z + rank_T, rank_K + 1, 0)
    return AcylProfile(b_V=b_V, rank_N=N.rank, rank_K=rank_K, rank_T=rank_T, N_gram=N)


@dataclass(frozen=True)
class FanoBlockRow:
    name: str
    b3_Z: int
    div_c2: int


def fano_block_row(W: FanoDescriptor) -> FanoBlockRow:
    """b3 and div c2 of the block from a generic pencil on a Picard-rank-1 Fano"""
    if W.rank != 1:
        raise MalformedInput(f"{W.name}: expected Picard rank 1, got {W.rank}")
    if not W.torsion_free_h3:
        warnings.warn(f"{W.name}: torsion in H³ not excluded", TorsionUnknown)
    # k = 1 and rank 1: the upper bound is attained
    _, div = div_c2_bounds(W.degree, W.index)
    return FanoBlockRow(name=W.name, b3_Z=W.b3 + 2 * W.genus, div_c2=div)


def rigidity_h1(h0: int, rho: int, g: int, h21: int = 0) -> int:
    """h1(T_Y) from h1 - h0 = 19 - ρ - g + h21 for a semi-Fano Y"""
    return h0 + 19 - rho - g + h21
