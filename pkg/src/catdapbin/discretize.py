"""Binary discretization of continuous variables.

Two routes are provided.  :func:`best_threshold` picks the cut point whose
induced 2x2 table against a binary response has the smallest chi-square
p-value.  :func:`best_equal_width_histogram` is the unsupervised baseline:
an equal-width histogram whose bin count minimises the histogram AIC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .stats import chi_square_2x2_cells
from .tables import CategoricalSeries

DEFAULT_GRID_SIZE = 100

# Read into output metadata by callers of the histogram route.
HISTOGRAM_ASSUMPTIONS = {
    "penalty_N": "sample count n",
    "section_width": "(x_max - x_min) / c for c equal-width sections",
}


@dataclass(frozen=True)
class ThresholdGrid:
    lower: float
    upper: float
    points: np.ndarray

    def __len__(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    p_value: float
    grid_index: int
    statistic: float = 0.0


def make_grid(a: float, b: float, count: int = DEFAULT_GRID_SIZE) -> ThresholdGrid:
    """``count`` evenly spaced points strictly inside ``(a, b)``."""
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise ValueError(f"need finite a < b, got ({a}, {b})")
    if count < 1:
        raise ValueError("grid needs at least one point")
    step = (b - a) / (count + 1)
    points = a + step * np.arange(1, count + 1)
    points.setflags(write=False)
    return ThresholdGrid(float(a), float(b), points)


def binarize(values, s: float, name: str = "") -> CategoricalSeries:
    """Code 1 where ``value < s``, else 0."""
    values = np.asarray(values, dtype=float)
    return CategoricalSeries((values < s).astype(np.int64), 2, name)


def threshold_scan(response: CategoricalSeries, values, grid: ThresholdGrid):
    """Chi-square statistic and p-value at every grid point.

    Returns ``(statistic, p_value)`` arrays of length ``len(grid)``.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size != len(response):
        raise ValueError("response and values must have the same length")
    if response.n_categories != 2:
        raise ValueError("threshold search needs a binary response")
    order = np.argsort(values, kind="stable")
    y = response.codes[order]
    ones_before = np.concatenate(([0], np.cumsum(y)))
    # rows with value < s_l, and how many of them have response 1
    below = np.searchsorted(values[order], grid.points, side="left")
    below_ones = ones_before[below]
    total_ones = ones_before[-1]
    n = values.size
    a = below_ones
    b = below - below_ones
    c = total_ones - below_ones
    d = (n - below) - c
    return chi_square_2x2_cells(a, b, c, d)


def best_threshold(
    response: CategoricalSeries, values, grid: ThresholdGrid
) -> ThresholdResult:
    """Grid point with the smallest chi-square p-value.

    When p-values tie (including underflow to 0) the larger statistic wins,
    then the smaller grid index.
    """
    stat, p = threshold_scan(response, values, grid)
    # lexsort: last key is primary
    idx = int(np.lexsort((np.arange(p.size), -stat, p))[0])
    return ThresholdResult(float(grid.points[idx]), float(p[idx]), idx, float(stat[idx]))


@dataclass(frozen=True)
class HistogramFit:
    counts: np.ndarray
    edges: np.ndarray
    log_multinomial: float
    loglik: float
    aic: float

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()


def _bin_codes(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    c = edges.size - 1
    # right bin on internal edges; the maximum goes to the last bin
    codes = np.searchsorted(edges, values, side="right") - 1
    return np.clip(codes, 0, c - 1)


def histogram_fit(values, c: int, value_range=None) -> HistogramFit:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty series")
    if c < 1:
        raise ValueError("need at least one section")
    lo, hi = (values.min(), values.max()) if value_range is None else value_range
    if not lo < hi:
        raise ValueError("histogram range must have x_min < x_max")
    if values.min() < lo or values.max() > hi:
        raise ValueError("values fall outside the histogram range")
    edges = np.linspace(lo, hi, c + 1)
    counts = np.bincount(_bin_codes(values, edges), minlength=c)
    n = values.size
    width = (hi - lo) / c
    log_multinomial = float(gammaln(n + 1) - gammaln(counts + 1).sum())
    nz = counts[counts > 0]
    loglik = float(np.sum(nz * np.log(nz / n)))
    aic = -2.0 * (log_multinomial + loglik) + 2.0 * ((c - 1) + n * math.log(width))
    return HistogramFit(counts, edges, log_multinomial, loglik, aic)


def histogram_aic(values, c: int, value_range=None) -> float:
    """AIC of the c-section equal-width histogram model.

    ``-2[log(n!/prod n(i)!) + sum n(i) log(n(i)/n)] + 2[(c-1) + n log d]``
    where ``d`` is the section width.  ``value_range`` defaults to the data
    range.
    """
    return histogram_fit(values, c, value_range).aic


def best_equal_width_histogram(values, c_max: int, value_range=None, name: str = ""):
    """Search ``c = 1..c_max`` for the minimum histogram AIC.

    Returns ``(c_best, edges, series)`` where ``series`` codes each value by
    its section.  Ties go to the smaller ``c``.
    """
    if c_max < 1:
        raise ValueError("c_max must be positive")
    values = np.asarray(values, dtype=float)
    fits = [histogram_fit(values, c, value_range) for c in range(1, c_max + 1)]
    best = min(range(c_max), key=lambda i: (fits[i].aic, i))
    fit = fits[best]
    series = CategoricalSeries(_bin_codes(values, fit.edges), best + 1, name)
    return best + 1, fit.edges, series
