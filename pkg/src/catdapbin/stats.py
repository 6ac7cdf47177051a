"""Pearson chi-square test for 2x2 tables and the normal/chi-square(1) tails."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .tables import ContingencyTable


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float


def chi_square_upper_tail(x, df: int = 1):
    """P(chi2_df > x) for df = 1, i.e. ``erfc(sqrt(x / 2))``.

    Accepts scalars or arrays.
    """
    if df != 1:
        raise ValueError("only df = 1 is supported")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("x must be non-negative")
    p = special.erfc(np.sqrt(x / 2.0))
    return float(p) if p.ndim == 0 else p


def std_normal_cdf(x):
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def std_normal_quantile(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
        raise ValueError("p must lie strictly inside (0, 1)")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out


def chi_square_2x2(table: ContingencyTable) -> ChiSquareResult:
    """Pearson's test of independence without continuity correction.

    A table with an empty row or column carries no information and gets
    statistic 0, p-value 1.
    """
    if table.dims != (2, 2):
        raise ValueError(f"expected a 2x2 table, got dims {table.dims}")
    if table.total_n < 1:
        raise ValueError("table is empty")
    obs = table.counts.astype(float)
    rows = obs.sum(axis=1)
    cols = obs.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        return ChiSquareResult(0.0, 1, 1.0)
    expected = np.outer(rows, cols) / table.total_n
    stat = float(np.sum((obs - expected) ** 2 / expected))
    return ChiSquareResult(stat, 1, chi_square_upper_tail(stat))


def chi_square_2x2_cells(a, b, c, d) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised statistic and p-value for tables ``[[a, b], [c, d]]``.

    Uses ``n (ad - bc)^2 / (r1 r2 c1 c2)``; degenerate margins give (0, 1).
    """
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    n = a + b + c + d
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    ok = denom > 0
    stat = np.zeros(np.broadcast(a, b, c, d).shape)
    np.divide(n * (a * d - b * c) ** 2, denom, out=stat, where=ok)
    p = np.where(ok, special.erfc(np.sqrt(stat / 2.0)), 1.0)
    return stat, p
