#!/usr/bin/env python3
"""Reports emitted by the command line: one invariant row per block, plus
generic JSON rendering for lattice and toric results."""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from blocks.descriptor import BlockEvaluation
from lattice.gram import GramLattice
from utils.errors import InconsistentReport, MalformedInput

logger = logging.getLogger(__name__)

REPORT_KEYS = ("name", "degree", "h2_Z", "N_gram", "rank_K", "b3_Z", "div_c2", "div_c2_interval",
               "e", "checks", "banner", "verdict")


def to_jsonable(value: Any) -> Any:
    """Plain JSON values; fractions become "p/q" strings and lattices lists of rows"""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, GramLattice):
        return value.rows()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, 'to_dict') and not isinstance(value, pd.DataFrame):
        return to_jsonable(value.to_dict())
    if isinstance(value, pd.DataFrame):
        return [to_jsonable(row) for row in value.astype(object).where(value.notna(), None)
                .to_dict(orient='records')]
    return value


def dump_json(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2, ensure_ascii=False)


@dataclass
class InvariantReport:
    """One block's row: degree, H²(Z), N, K, H³(Z), div c2(Z) and e"""

    name: str
    degree: int
    h2_Z: int
    N_gram: List[List[int]]
    rank_K: int
    b3_Z: int
    div_c2: List[int]
    e: int
    div_c2_interval: Optional[List[int]] = None
    checks: List[str] = field(default_factory=list)
    banner: Optional[str] = None
    verdict: Optional[str] = None

    @classmethod
    def from_evaluation(cls, result: BlockEvaluation) -> "InvariantReport":
        c2 = result.c2
        return cls(
            name=result.block.name,
            degree=result.block.degree,
            h2_Z=result.cohomology.b2_Z,
            N_gram=result.profile.N_gram.rows(),
            rank_K=result.profile.rank_K,
            b3_Z=result.cohomology.b3_Z,
            div_c2=list(result.div_c2),
            e=result.block.e,
            div_c2_interval=None if c2.exact else [c2.lower, c2.upper],
            checks=list(result.checks),
            banner=result.banner,
            verdict=result.verdict,
        )

    def validate(self):
        """Re-check the row before it is written out"""
        rank_N = len(self.N_gram)
        if self.rank_K + rank_N != self.h2_Z - 1:
            raise InconsistentReport(f"rank K + rank N = {self.rank_K + rank_N}, "
                                     f"but b2(Z) - 1 = {self.h2_Z - 1}")
        odd = [d for d in self.div_c2 if d % 2]
        if odd:
            raise InconsistentReport(f"div c2 must be even, got {odd}")
        if self.div_c2_interval and self.div_c2_interval[0] > self.div_c2_interval[1]:
            raise InconsistentReport(f"empty div c2 interval {self.div_c2_interval}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'degree': self.degree,
            'h2_Z': self.h2_Z,
            'N_gram': [list(r) for r in self.N_gram],
            'rank_K': self.rank_K,
            'b3_Z': self.b3_Z,
            'div_c2': list(self.div_c2),
            'div_c2_interval': self.div_c2_interval,
            'e': self.e,
            'checks': list(self.checks),
            'banner': self.banner,
            'verdict': self.verdict,
        }

    def to_json(self) -> str:
        self.validate()
        return dump_json(self.to_dict())

    def to_text(self) -> str:
        self.validate()
        div = ", ".join(str(d) for d in self.div_c2)
        if self.div_c2_interval:
            div = f"[{self.div_c2_interval[0]}, {self.div_c2_interval[1]}]"
        N = "(" + ",".join("(" + ",".join(str(x) for x in row) + ")" for row in self.N_gram) + ")"
        lines = []
        if self.banner:
            lines.append(f"⚠️  {self.banner}")
        lines += [
            f"📦 Block {self.name or '(unnamed)'}",
            f"  -K³:     {self.degree}",
            f"  H²(Z):   Z^{self.h2_Z}",
            f"  N:       {N}",
            f"  K:       rank {self.rank_K}",
            f"  H³(Z):   Z^{self.b3_Z}",
            f"  div c2:  {div}",
            f"  e:       {self.e}",
        ]
        if self.verdict:
            lines.append(f"  N check: {self.verdict}")
        lines.append("  Checks:")
        lines += [f"    ✅ {c}" for c in self.checks]
        return "\n".join(lines)


def parse_json_report(text: str) -> InvariantReport:
    """Inverse of InvariantReport.to_json"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInput(f"invalid report JSON ({e.msg} at line {e.lineno})")
    if not isinstance(data, dict):
        raise MalformedInput("a report is a JSON object")
    missing = [k for k in REPORT_KEYS if k not in data]
    if missing:
        raise MalformedInput(f"report is missing {missing[0]!r}")
    return InvariantReport(**{k: data[k] for k in REPORT_KEYS})


def render_table(df: pd.DataFrame) -> str:
    return df.to_string(index=False)
