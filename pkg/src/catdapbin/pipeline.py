"""Repeated half-split threshold search and model selection.

Each iteration draws one random split of the rows.  Thresholds for the
continuous predictors are searched on the first half ``G1``; the second
half ``G2`` is binarized with them and every predictor subset is scored.
Thresholds and AICs are then averaged over all iterations.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .discretize import (
    DEFAULT_GRID_SIZE,
    ThresholdResult,
    best_threshold,
    binarize,
    make_grid,
)
from .tables import (
    DEFAULT_MAX_CELLS,
    CategoricalSeries,
    ModelSpec,
    aic_conditional,
    aic_null,
    build_table,
    enumerate_models,
)

CONTINUOUS = "continuous"
BINARY = "binary"
CATEGORICAL = "categorical"
KINDS = (CONTINUOUS, BINARY, CATEGORICAL)

SPLIT_AVERAGE = "split-average"
FULL_DATA = "full-data"


@dataclass(frozen=True)
class Dataset:
    """Named columns of equal length.

    Continuous columns hold floats; binary and categorical columns hold
    integer codes starting at 0.
    """

    columns: Mapping[str, np.ndarray]
    kinds: Mapping[str, str]

    def __post_init__(self) -> None:
        if set(self.columns) != set(self.kinds):
            raise ValueError("every column needs exactly one kind")
        lengths = {np.asarray(v).shape[0] for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("columns have different lengths")
        cols = {}
        for name, values in self.columns.items():
            kind = self.kinds[name]
            if kind not in KINDS:
                raise ValueError(f"column {name!r}: unknown kind {kind!r}")
            arr = np.asarray(values, dtype=float if kind == CONTINUOUS else np.int64)
            if kind == CONTINUOUS and not np.all(np.isfinite(arr)):
                raise ValueError(f"column {name!r} has non-finite values")
            if kind != CONTINUOUS and arr.size and arr.min() < 0:
                raise ValueError(f"column {name!r} has negative codes")
            if kind == BINARY and arr.size and arr.max() > 1:
                raise ValueError(f"column {name!r} is not binary")
            arr = arr.copy()
            arr.setflags(write=False)
            cols[name] = arr
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "kinds", dict(self.kinds))

    @property
    def n_rows(self) -> int:
        return next(iter(self.columns.values())).shape[0] if self.columns else 0

    def n_categories(self, name: str) -> int:
        kind = self.kinds[name]
        if kind == BINARY:
            return 2
        if kind == CATEGORICAL:
            return int(self.columns[name].max()) + 1
        raise ValueError(f"column {name!r} is continuous")

    def categorical(self, name: str, index=None) -> CategoricalSeries:
        codes = self.columns[name]
        if index is not None:
            codes = codes[index]
        return CategoricalSeries(codes, self.n_categories(name), name)


@dataclass(frozen=True)
class ThresholdSearch:
    lower: float
    upper: float
    grid_size: int = DEFAULT_GRID_SIZE


@dataclass(frozen=True)
class AnalysisConfig:
    """What to analyse and how.

    ``searches`` holds the threshold range for every continuous predictor.
    ``fixed_thresholds`` binarizes a continuous column with a known cut
    instead of searching; a continuous response must be listed there.
    """

    response: str
    predictors: tuple[str, ...]
    searches: Mapping[str, ThresholdSearch] = field(default_factory=dict)
    iterations: int = 1000
    master_seed: int = 0
    fixed_thresholds: Mapping[str, float] = field(default_factory=dict)
    workers: int = 1
    max_cells: int = DEFAULT_MAX_CELLS

    def __post_init__(self) -> None:
        object.__setattr__(self, "predictors", tuple(self.predictors))
        if self.response in self.predictors:
            raise ValueError("the response cannot also be a predictor")
        if len(set(self.predictors)) != len(self.predictors):
            raise ValueError("duplicate predictor")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        for name, search in self.searches.items():
            if not search.lower < search.upper:
                raise ValueError(f"{name!r}: threshold range needs a < b")

    def validate(self, dataset: Dataset) -> None:
        for name in (self.response, *self.predictors):
            if name not in dataset.columns:
                raise ValueError(f"column {name!r} not in dataset")
            if dataset.kinds[name] != CONTINUOUS:
                continue
            if name == self.response:
                if name not in self.fixed_thresholds:
                    raise ValueError(
                        f"continuous response {name!r} needs a fixed threshold"
                    )
            elif name not in self.searches and name not in self.fixed_thresholds:
                raise ValueError(f"continuous predictor {name!r} needs a range")
        if self.searched_columns(dataset) and self._response_categories(dataset) != 2:
            raise ValueError("threshold search needs a binary response")
        if dataset.n_rows < 4:
            raise ValueError("need at least 4 rows to split")

    def searched_columns(self, dataset: Dataset) -> list[str]:
        return [
            p
            for p in self.predictors
            if dataset.kinds[p] == CONTINUOUS and p not in self.fixed_thresholds
        ]

    def _response_categories(self, dataset: Dataset) -> int:
        if dataset.kinds[self.response] == CONTINUOUS:
            return 2
        return dataset.n_categories(self.response)


@dataclass(frozen=True)
class IterationResult:
    index: int
    thresholds: Mapping[str, ThresholdResult]
    aics: np.ndarray  # one per model, enumeration order
    null_aic: float


@dataclass(frozen=True)
class AggregateResult:
    """Averaged thresholds and model AICs for one response.

    ``aics`` are on the CATDAP scale (no-predictor model = 0);
    ``null_aic + aics`` gives absolute AICs.  ``source`` tells whether the
    numbers are split averages or a single full-data pass.
    """

    response: str
    predictors: tuple[str, ...]
    models: tuple[ModelSpec, ...]
    aics: np.ndarray
    null_aic: float
    thresholds: Mapping[str, float]
    iterations: int
    source: str = SPLIT_AVERAGE

    @property
    def best_index(self) -> int:
        # enumeration order is size-then-lexicographic, so the first
        # minimum is also the most parsimonious one
        return int(np.argmin(self.aics))

    @property
    def best(self) -> ModelSpec:
        return self.models[self.best_index]

    @property
    def total_aics(self) -> np.ndarray:
        return self.null_aic + self.aics

    def predictor_names(self, spec: ModelSpec) -> tuple[str, ...]:
        return tuple(self.predictors[a - 1] for a in spec.predictor_axes)


def split_half(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random split into ``floor(n/2)`` and ``ceil(n/2)`` row indices."""
    if n < 4:
        raise ValueError("need at least 4 rows to split")
    perm = rng.permutation(n)
    m = n // 2
    return perm[:m], perm[m:]


def iteration_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for iteration ``index``, reproducible in any order."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _response_series(dataset: Dataset, config: AnalysisConfig, index) -> CategoricalSeries:
    name = config.response
    if dataset.kinds[name] == CONTINUOUS:
        return binarize(dataset.columns[name][index], config.fixed_thresholds[name], name)
    return dataset.categorical(name, index)


def _predictor_series(dataset, name, index, thresholds) -> CategoricalSeries:
    if dataset.kinds[name] == CONTINUOUS:
        return binarize(dataset.columns[name][index], thresholds[name], name)
    return dataset.categorical(name, index)


def run_iteration(
    dataset: Dataset,
    config: AnalysisConfig,
    rng: np.random.Generator,
    index: int = 0,
    split: tuple[np.ndarray, np.ndarray] | None = None,
) -> IterationResult:
    """One split: thresholds from ``G1``, model AICs from ``G2``.

    The same split is shared by every continuous predictor.
    """
    g1, g2 = split if split is not None else split_half(dataset.n_rows, rng)
    response_g1 = _response_series(dataset, config, g1)
    found: dict[str, ThresholdResult] = {}
    for name in config.searched_columns(dataset):
        search = config.searches[name]
        grid = make_grid(search.lower, search.upper, search.grid_size)
        found[name] = best_threshold(response_g1, dataset.columns[name][g1], grid)

    cuts = dict(config.fixed_thresholds)
    cuts.update({name: r.threshold for name, r in found.items()})
    series = [_response_series(dataset, config, g2)]
    series += [_predictor_series(dataset, p, g2, cuts) for p in config.predictors]
    table = build_table(series, config.max_cells)
    models = enumerate_models(len(config.predictors), 0)
    aics = np.array([aic_conditional(table, spec) for spec in models])
    return IterationResult(index, found, aics, aic_null(table, 0))


def aggregate(
    iterations: Sequence[IterationResult], config: AnalysisConfig
) -> AggregateResult:
    """Arithmetic means over iterations, reduced in iteration order."""
    ordered = sorted(iterations, key=lambda r: r.index)
    if not ordered:
        raise ValueError("nothing to aggregate")
    aics = np.mean(np.stack([r.aics for r in ordered]), axis=0)
    null = float(np.mean([r.null_aic for r in ordered]))
    names = list(ordered[0].thresholds)
    thresholds = {
        name: float(np.mean([r.thresholds[name].threshold for r in ordered]))
        for name in names
    }
    for name, value in config.fixed_thresholds.items():
        if name == config.response or name in config.predictors:
            thresholds.setdefault(name, float(value))
    aics.setflags(write=False)
    return AggregateResult(
        response=config.response,
        predictors=config.predictors,
        models=tuple(enumerate_models(len(config.predictors), 0)),
        aics=aics,
        null_aic=null,
        thresholds=thresholds,
        iterations=len(ordered),
    )


def run_analysis(dataset: Dataset, config: AnalysisConfig) -> AggregateResult:
    """Run ``config.iterations`` splits and average them.

    Iteration ``i`` draws from its own generator keyed on
    ``(master_seed, i)``, so results do not depend on ``workers``.
    """
    config.validate(dataset)

    def one(i: int) -> IterationResult:
        return run_iteration(dataset, config, iteration_rng(config.master_seed, i), i)

    indices = range(config.iterations)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(one, indices))
    else:
        results = [one(i) for i in indices]
    return aggregate(results, config)


def final_binarize(
    dataset: Dataset, thresholds: AggregateResult | Mapping[str, float]
) -> Dataset:
    """Binarize every continuous column over all rows with its averaged cut."""
    if dataset.n_rows == 0:
        raise ValueError("dataset is empty")
    if isinstance(thresholds, AggregateResult):
        thresholds = thresholds.thresholds
    columns, kinds = {}, {}
    for name, values in dataset.columns.items():
        if dataset.kinds[name] == CONTINUOUS:
            if name not in thresholds:
                raise ValueError(f"no threshold for continuous column {name!r}")
            columns[name] = binarize(values, thresholds[name], name).codes
            kinds[name] = BINARY
        else:
            columns[name] = values
            kinds[name] = dataset.kinds[name]
    return Dataset(columns, kinds)


def full_data_scores(
    dataset: Dataset,
    response: str,
    predictors: Sequence[str],
    max_cells: int = DEFAULT_MAX_CELLS,
) -> AggregateResult:
    """Score every predictor subset once on a fully categorical dataset."""
    predictors = tuple(predictors)
    names = (response, *predictors)
    if any(dataset.kinds[n] == CONTINUOUS for n in names):
        raise ValueError("binarize continuous columns first")
    table = build_table([dataset.categorical(n) for n in names], max_cells)
    models = tuple(enumerate_models(len(predictors), 0))
    aics = np.array([aic_conditional(table, spec) for spec in models])
    aics.setflags(write=False)
    return AggregateResult(
        response=response,
        predictors=predictors,
        models=models,
        aics=aics,
        null_aic=aic_null(table, 0),
        thresholds={},
        iterations=1,
        source=FULL_DATA,
    )


@dataclass(frozen=True)
class RankRow:
    size: int
    predictors: tuple[str, ...]
    aic: float
    total_aic: float
    best: bool


def rank_models(result: AggregateResult) -> list[RankRow]:
    """Rows grouped by predictor count, enumeration order within a group."""
    best = result.best_index
    rows = [
        RankRow(
            size=len(spec.predictor_axes),
            predictors=result.predictor_names(spec),
            aic=float(result.aics[i]),
            total_aic=float(result.null_aic + result.aics[i]),
            best=i == best,
        )
        for i, spec in enumerate(result.models)
    ]
    return sorted(rows, key=lambda r: r.size)


def models_within(result: AggregateResult, margin: float) -> list[ModelSpec]:
    """Models whose AIC is at most ``margin`` above the minimum."""
    floor = float(np.min(result.aics))
    return [m for m, a in zip(result.models, result.aics) if a - floor <= margin]


def is_finite_result(result: AggregateResult) -> bool:
    return all(math.isfinite(a) for a in result.aics) and math.isfinite(result.null_aic)
