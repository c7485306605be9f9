#!/usr/bin/env python3
"""Built-in datasets: rank-1 Fano 3-folds, nodal cubic semi-Fanos and the worked block examples."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import pandas as pd

from blocks.invariants import FanoDescriptor, betti3_semifano, fano_block_row
from utils.settings import get_settings

logger = logging.getLogger(__name__)

# name, index r, (-K)^3, b3(Y), expected b3(Z), expected div c2(Z)
FANO_RANK1_ROWS = [
    ("P3", 4, 64, 0, 66, 2),
    ("Q", 3, 54, 0, 56, 2),
    ("B1", 2, 8, 42, 52, 8),
    ("B2", 2, 16, 20, 38, 4),
    ("B3", 2, 24, 10, 36, 24),
    ("B4", 2, 32, 4, 38, 4),
    ("B5", 2, 40, 0, 42, 8),
    ("V2", 1, 2, 104, 108, 2),
    ("V4", 1, 4, 60, 66, 4),
    ("V6", 1, 6, 40, 48, 6),
    ("V8", 1, 8, 28, 38, 8),
    ("V10", 1, 10, 20, 32, 2),
    ("V12", 1, 12, 14, 28, 12),
    ("V14", 1, 14, 10, 26, 2),
    ("V16", 1, 16, 6, 24, 8),
    ("V18", 1, 18, 4, 24, 6),
    ("V22", 1, 22, 0, 24, 2),
]

FANO_RANK1_COLUMNS = ["name", "r", "degree", "b3_Y", "b3_Z", "div_c2"]

# semi-Fano small resolutions of nodal cubics: nodes e, defect σ, s, P, ρ, b3(Y); None where unknown
NODAL_CUBIC_ROWS = [
    (0, 0, 0, 0, 1, 10),
    (1, 0, 0, 0, None, None),
    (2, 0, 0, 0, None, None),
    (3, 0, 0, 0, None, None),
    (4, 0, 0, 0, None, None),
    (4, 1, 2, 1, 2, 4),
    (5, 1, 0, 1, None, None),
    (5, 1, 0, 1, None, None),
    (6, 1, 2, 0, 2, 0),
    (6, 2, 6, 2, 3, 2),
    (7, 2, 6, 2, 3, 0),
    (7, 2, 0, 3, None, None),
    (8, 3, 24, 5, 4, 0),
    (9, 4, 102, 9, 5, 0),
    (10, 5, 332, 15, 6, 0),
]

NODAL_CUBIC_COLUMNS = ["e", "sigma", "s", "P", "rho", "b3_Y"]
CUBIC_B3 = 10

# descriptor file, -K^3, b2(Z), N, rank K, b3(Z), div c2 values, e
BLOCK_EXAMPLE_ROWS = [
    ("quartic_plane.json", 4, 3, "((-2,1),(1,4))", 0, 50, "2, 4", 9),
    ("quartic_quadric.json", 4, 3, "((-2,2),(2,4))", 0, 44, "2", 12),
    ("quartic_scroll.json", 4, 3, "((-2,3),(3,4))", 0, 34, "2, 4", 17),
    ("quartic_del_pezzo.json", 4, 3, "((0,4),(4,4))", 0, 36, "4", 16),
    ("burkhardt_quartic.json", 4, 17, "E6*(-3)+E8(-1)+U", 0, 6, "2", 45),
    ("p3_four_quartics.json", 64, 5, "<4>", 3, 24, "2", 24),
    ("p3_two_conics.json", 64, 4, "((-2,0,2),(0,-2,2),(2,2,4))", 0, 30, "2", 20),
    ("p1942_generic.json", 22, 11, "E8(-1)+<8>+<-16>", 0, 24, "2", 9),
    ("p1942_split.json", 22, 23, "E8(-1)+<8>+<-16>", 12, 0, "2", 33),
    ("bundle_over_quadric.json", 4, 3, "<4>+<-2>", 0, 46, "2", 12),
]

BLOCK_EXAMPLE_COLUMNS = ["descriptor", "minus_K3", "h2_Z", "N", "rank_K", "b3_Z", "div_c2", "e"]


def fano_rank1_table() -> pd.DataFrame:
    return pd.DataFrame(FANO_RANK1_ROWS, columns=FANO_RANK1_COLUMNS)


def fano_descriptors() -> List[FanoDescriptor]:
    df = fano_rank1_table()
    return [FanoDescriptor(name=row.name, rank=1, index=int(row.r), degree=int(row.degree),
                           b3=int(row.b3_Y))
            for row in df.itertuples(index=False)]


def _row(W: FanoDescriptor) -> dict:
    result = fano_block_row(W)
    return {'name': W.name, 'r': W.index, 'degree': W.degree, 'b3_Y': W.b3,
            'b3_Z': result.b3_Z, 'div_c2': result.div_c2}


def reproduce_fano_rank1(workers: Optional[int] = None) -> pd.DataFrame:
    """Recompute b3(Z) and div c2(Z) for every rank-1 Fano row, in table order"""
    workers = workers or get_settings().workers
    descriptors = fano_descriptors()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, descriptors))
    else:
        rows = [_row(W) for W in descriptors]
    df = pd.DataFrame(rows, columns=FANO_RANK1_COLUMNS)
    logger.info("reproduced %d rank-1 Fano rows", len(df))
    return df


def nodal_cubic_table() -> pd.DataFrame:
    df = pd.DataFrame(NODAL_CUBIC_ROWS, columns=NODAL_CUBIC_COLUMNS)
    return df.astype({'rho': 'Int64', 'b3_Y': 'Int64'})


def check_nodal_cubics(df: Optional[pd.DataFrame] = None) -> List[str]:
    """Rows with small resolutions must satisfy b3 = 10 - 2e + 2σ and e - σ <= 5"""
    df = nodal_cubic_table() if df is None else df
    problems = []
    for i, row in enumerate(df.itertuples(index=False)):
        if row.s <= 0:
            continue
        b3 = betti3_semifano(CUBIC_B3, int(row.e), int(row.sigma))
        if b3 != row.b3_Y:
            problems.append(f"row {i}: b3(Y) = {row.b3_Y}, formula gives {b3}")
        if row.e - row.sigma > 5:
            problems.append(f"row {i}: e - σ = {row.e - row.sigma} > 5")
    return problems


def block_examples_table() -> pd.DataFrame:
    return pd.DataFrame(BLOCK_EXAMPLE_ROWS, columns=BLOCK_EXAMPLE_COLUMNS)
