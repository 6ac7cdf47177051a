"""Contingency tables and AIC scores for conditional-probability models.

A table is built from one categorical series per axis.  A model
``(response; predictors)`` states that the response distribution depends
only on the joint category of the predictor axes; its AIC is reported on
the CATDAP scale, where the model without predictors scores exactly 0 and
negative values indicate dependence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_MAX_CELLS = 2**20


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CategoricalSeries:
    """A column of category codes ``0 <= code < n_categories``."""

    codes: np.ndarray
    n_categories: int
    name: str = ""

    def __post_init__(self) -> None:
        codes = np.asarray(self.codes)
        if codes.ndim != 1 or codes.size == 0:
            raise ValueError(f"series {self.name!r} must be a non-empty 1-d sequence")
        if codes.dtype.kind == "f":
            if not np.all(np.equal(np.mod(codes, 1), 0)):
                raise ValueError(f"series {self.name!r} has non-integer codes")
        elif codes.dtype.kind not in "iub":
            raise ValueError(f"series {self.name!r} has non-integer codes")
        if int(self.n_categories) < 1:
            raise ValueError("n_categories must be positive")
        codes = codes.astype(np.int64)
        if codes.min() < 0 or codes.max() >= self.n_categories:
            raise ValueError(
                f"series {self.name!r}: code out of range [0, {self.n_categories})"
            )
        object.__setattr__(self, "codes", _frozen(codes))
        object.__setattr__(self, "n_categories", int(self.n_categories))

    def __len__(self) -> int:
        return self.codes.size

    def take(self, index: np.ndarray) -> "CategoricalSeries":
        """Return the rows at ``index``, keeping the category count."""
        return CategoricalSeries(self.codes[index], self.n_categories, self.name)


@dataclass(frozen=True)
class ContingencyTable:
    """Dense m-way table of cell counts.

    ``counts`` has shape ``dims``; cell ``(c1, ..., cm)`` holds the number
    of rows whose codes equal ``(c1, ..., cm)``.
    """

    counts: np.ndarray
    labels: tuple[str, ...] = ()
    total_n: int = field(init=False)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.ndim == 0:
            raise ValueError("a table needs at least one axis")
        if np.any(counts < 0):
            raise ValueError("cell counts must be non-negative")
        if counts.dtype.kind == "f" and not np.all(np.equal(np.mod(counts, 1), 0)):
            raise ValueError("cell counts must be integers")
        counts = _frozen(counts.astype(np.int64))
        labels = tuple(self.labels) or tuple(f"X{i}" for i in range(counts.ndim))
        if len(labels) != counts.ndim:
            raise ValueError("one label per axis required")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "total_n", int(counts.sum()))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.counts.shape

    @property
    def ndim(self) -> int:
        return self.counts.ndim

    def marginal(self, axes: Sequence[int]) -> np.ndarray:
        """Counts summed over every axis not in ``axes``, in ``axes`` order."""
        axes = tuple(axes)
        if len(set(axes)) != len(axes) or any(not 0 <= a < self.ndim for a in axes):
            raise ValueError(f"invalid axes {axes} for a {self.ndim}-way table")
        dropped = tuple(a for a in range(self.ndim) if a not in axes)
        summed = self.counts.sum(axis=dropped) if dropped else self.counts
        kept = sorted(axes)
        return np.transpose(summed, [kept.index(a) for a in axes])


@dataclass(frozen=True)
class ModelSpec:
    """Model ``(response; predictors)`` over the axes of a table."""

    response_axis: int
    predictor_axes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        preds = tuple(int(a) for a in self.predictor_axes)
        if len(set(preds)) != len(preds):
            raise ValueError("duplicate predictor axis")
        if self.response_axis in preds:
            raise ValueError("response axis cannot also be a predictor")
        if self.response_axis < 0 or any(a < 0 for a in preds):
            raise ValueError("axis indices must be non-negative")
        object.__setattr__(self, "predictor_axes", tuple(sorted(preds)))

    def check(self, table: ContingencyTable) -> None:
        if any(a >= table.ndim for a in (self.response_axis, *self.predictor_axes)):
            raise ValueError(f"{self} does not fit a {table.ndim}-way table")


@dataclass(frozen=True)
class ModelScore:
    spec: ModelSpec
    aic: float


def build_table(
    series: Sequence[CategoricalSeries], max_cells: int = DEFAULT_MAX_CELLS
) -> ContingencyTable:
    """Cross-classify equal-length series into an m-way table."""
    if not series:
        raise ValueError("at least one series is required")
    n = len(series[0])
    if any(len(s) != n for s in series):
        raise ValueError("all series must have the same length")
    dims = tuple(s.n_categories for s in series)
    if math.prod(dims) > max_cells:
        raise ValueError(f"table with dims {dims} exceeds the {max_cells}-cell cap")
    flat = np.ravel_multi_index(tuple(s.codes for s in series), dims)
    counts = np.bincount(flat, minlength=math.prod(dims)).reshape(dims)
    return ContingencyTable(counts, tuple(s.name for s in series))


def _xlogx_ratio(counts: np.ndarray, ref: np.ndarray) -> float:
    # sum of n * log(n / ref) with 0 * log 0 := 0
    mask = counts > 0
    n = counts[mask].astype(float)
    return float(np.sum(n * np.log(n / ref[mask])))


def aic_conditional(table: ContingencyTable, spec: ModelSpec) -> float:
    """CATDAP AIC of ``spec`` relative to the no-predictor model.

    ``-2 * sum n(i1,j) log(n n(i1,j) / (n(i1) n(j))) + 2 (c1-1)(cJ-1)``
    with natural logs; empty cells contribute nothing.
    """
    spec.check(table)
    if table.total_n < 1:
        raise ValueError("table is empty")
    if not spec.predictor_axes:
        return 0.0
    joint = table.marginal((spec.response_axis, *spec.predictor_axes))
    c1 = joint.shape[0]
    joint = joint.reshape(c1, -1)
    c_j = joint.shape[1]
    n_resp = joint.sum(axis=1, keepdims=True)
    n_pred = joint.sum(axis=0, keepdims=True)
    expected = (n_resp * n_pred).astype(float) / table.total_n
    loglik = _xlogx_ratio(joint, expected)
    return -2.0 * loglik + 2.0 * (c1 - 1) * (c_j - 1)


def aic_null(table: ContingencyTable, response_axis: int) -> float:
    """Absolute AIC of the response marginal, ``-2 sum n(i1) log(n(i1)/n) + 2(c1-1)``.

    Adding this to :func:`aic_conditional` gives the absolute AIC of the
    conditional model, ``-2 sum n(i1,j) log(n(i1,j)/n(j)) + 2 (c1-1) cJ``.
    """
    if table.total_n < 1:
        raise ValueError("table is empty")
    n_resp = table.marginal((response_axis,))
    ref = np.full(n_resp.shape, float(table.total_n))
    return -2.0 * _xlogx_ratio(n_resp, ref) + 2.0 * (n_resp.size - 1)


def delta_aic_2x2(table: ContingencyTable) -> float:
    """AIC(independence) - AIC(dependence) for a 2x2 table.

    Positive values favour the dependence model.
    """
    if table.dims != (2, 2):
        raise ValueError(f"expected a 2x2 table, got dims {table.dims}")
    return -aic_conditional(table, ModelSpec(0, (1,)))


def enumerate_models(num_predictors: int, response_axis: int = 0) -> list[ModelSpec]:
    """All ``2**num_predictors`` predictor subsets, by size then lexicographically.

    Predictor axes are the ``num_predictors + 1`` table axes other than
    ``response_axis``.
    """
    if num_predictors < 0:
        raise ValueError("num_predictors must be non-negative")
    axes = [a for a in range(num_predictors + 1) if a != response_axis]
    if len(axes) != num_predictors:
        raise ValueError("response_axis must be one of the table axes")
    return [
        ModelSpec(response_axis, subset)
        for size in range(num_predictors + 1)
        for subset in itertools.combinations(axes, size)
    ]


def score_models(
    table: ContingencyTable, specs: Sequence[ModelSpec]
) -> list[ModelScore]:
    return [ModelScore(spec, aic_conditional(table, spec)) for spec in specs]
