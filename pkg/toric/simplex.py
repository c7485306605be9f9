#!/usr/bin/env python3
"""Exact rational simplex method.

Solves  max c·x  subject to  A·x <= b,  x >= 0  with b >= 0, so the slack
basis is a feasible start and no first phase is needed. Every entry is a
``fractions.Fraction``; Bland's rule (lowest-index entering variable, ties in
the ratio test broken by lowest basic index) keeps degenerate problems from
cycling.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from utils.errors import MalformedInput

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    """Status, optimum and primal solution of a solved program"""

    status: str
    value: Optional[Fraction] = None
    x: List[Fraction] = field(default_factory=list)
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class SimplexTableau:
    """Dense tableau with slack columns appended after the structural ones"""

    def __init__(self, A: Sequence[Sequence], b: Sequence, c: Sequence):
        self.m = len(A)
        self.n = len(c)
        if len(b) != self.m:
            raise MalformedInput(f"{self.m} constraint rows but {len(b)} right-hand sides")
        for i, row in enumerate(A):
            if len(row) != self.n:
                raise MalformedInput(f"constraint row {i} has {len(row)} coefficients, "
                                     f"expected {self.n}")
        self.rhs = [Fraction(x) for x in b]
        negative = next((i for i, x in enumerate(self.rhs) if x < 0), None)
        if negative is not None:
            raise MalformedInput(f"right-hand side {negative} is negative; "
                                 f"the slack basis must be feasible")

        zero, one = Fraction(0), Fraction(1)
        self.rows = [[Fraction(x) for x in row] + [one if k == i else zero for k in range(self.m)]
                     for i, row in enumerate(A)]
        # reduced costs of the current basis and the objective value it attains
        self.cost = [Fraction(x) for x in c] + [zero] * self.m
        self.value = zero
        self.basis = list(range(self.n, self.n + self.m))
        self.pivots = 0

    def entering(self) -> Optional[int]:
        return next((j for j, r in enumerate(self.cost) if r > 0), None)

    def leaving(self, j: int) -> Optional[int]:
        best, best_key = None, None
        for i in range(self.m):
            a = self.rows[i][j]
            if a > 0:
                key = (self.rhs[i] / a, self.basis[i])
                if best_key is None or key < best_key:
                    best, best_key = i, key
        return best

    def pivot(self, i: int, j: int):
        piv = self.rows[i][j]
        row = [x / piv for x in self.rows[i]]
        self.rows[i] = row
        self.rhs[i] /= piv
        for k in range(self.m):
            f = self.rows[k][j]
            if k != i and f:
                self.rows[k] = [x - f * y for x, y in zip(self.rows[k], row)]
                self.rhs[k] -= f * self.rhs[i]
        f = self.cost[j]
        self.cost = [x - f * y for x, y in zip(self.cost, row)]
        self.value += f * self.rhs[i]
        self.basis[i] = j
        self.pivots += 1

    def solution(self) -> List[Fraction]:
        x = [Fraction(0)] * self.n
        for i, var in enumerate(self.basis):
            if var < self.n:
                x[var] = self.rhs[i]
        return x

    def solve(self) -> LPResult:
        while True:
            j = self.entering()
            if j is None:
                logger.debug("simplex optimal after %d pivots: %s", self.pivots, self.value)
                return LPResult(OPTIMAL, self.value, self.solution(), self.pivots)
            i = self.leaving(j)
            if i is None:
                logger.debug("simplex unbounded in column %d", j)
                return LPResult(UNBOUNDED, None, [], self.pivots)
            self.pivot(i, j)


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    """max c·x over {A·x <= b, x >= 0}; b must be non-negative"""
    return SimplexTableau(A, b, c).solve()
