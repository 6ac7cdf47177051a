"""Synthetic data for the three-case simulation study.

``simb`` is an equal-weight mixture of two truncated normals on [1, 10],
``csimb`` marks values falling in one of two half-open intervals, and
``simc`` is an unrelated Beta(3.45, 10) nuisance variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .pipeline import (
    BINARY,
    CONTINUOUS,
    AggregateResult,
    AnalysisConfig,
    Dataset,
    ThresholdSearch,
    run_analysis,
)
from .stats import std_normal_cdf, std_normal_quantile
from .tables import CategoricalSeries

SAMPLE_SIZE = 1000
BETA_SHAPE = (3.45, 10.0)
SIMC_RANGE = (0.1, 0.5)

# Model labels of the three-model comparison, as predictor-name sets.
STUDY_MODELS = {
    "Model 1": ("simb", "simc"),
    "Model 2": ("simb",),
    "Model 3": ("simc",),
}


def _pdf(z: float) -> float:
    return float(np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi))


@dataclass(frozen=True)
class TruncNormSpec:
    mu: float
    sigma: float
    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.a < self.b:
            raise ValueError("truncation bounds need a < b")

    def _standardized(self) -> tuple[float, float, float]:
        alpha = (self.a - self.mu) / self.sigma
        beta = (self.b - self.mu) / self.sigma
        # upper-tail intervals: take the mass from the mirrored side to
        # avoid cancelling two CDF values close to 1
        if alpha > 0:
            mass = std_normal_cdf(-alpha) - std_normal_cdf(-beta)
        else:
            mass = std_normal_cdf(beta) - std_normal_cdf(alpha)
        return alpha, beta, float(mass)

    def mean(self) -> float:
        """Closed-form mean of the truncated distribution."""
        alpha, beta, mass = self._standardized()
        return float(self.mu + self.sigma * (_pdf(alpha) - _pdf(beta)) / mass)

    def variance(self) -> float:
        alpha, beta, mass = self._standardized()
        shift = (_pdf(alpha) - _pdf(beta)) / mass
        spread = (alpha * _pdf(alpha) - beta * _pdf(beta)) / mass
        return float(self.sigma**2 * (1 + spread - shift**2))


@dataclass(frozen=True)
class SimCase:
    case_id: int
    components: tuple[TruncNormSpec, TruncNormSpec]
    intervals: tuple[tuple[float, float], tuple[float, float]]
    search_range: tuple[float, float]


SIM_CASES: Mapping[int, SimCase] = {
    1: SimCase(
        1,
        (TruncNormSpec(3, 1.75, 1, 10), TruncNormSpec(7, 0.75, 1, 10)),
        ((2.0, 4.0), (6.0, 8.0)),
        (1.5, 8.0),
    ),
    2: SimCase(
        2,
        (TruncNormSpec(3, 0.75, 1, 10), TruncNormSpec(7, 1.75, 1, 10)),
        ((2.0, 4.0), (6.5, 8.5)),
        (2.0, 9.0),
    ),
    3: SimCase(
        3,
        (TruncNormSpec(3, 0.75, 1, 10), TruncNormSpec(7, 0.75, 1, 10)),
        ((2.5, 3.5), (6.5, 7.5)),
        (2.0, 8.0),
    ),
}


def sample_truncated_normal(spec: TruncNormSpec, n: int, rng: np.random.Generator):
    """Inverse-CDF draws from the normal restricted to ``[a, b]``."""
    if n < 1:
        raise ValueError("n must be positive")
    alpha = (spec.a - spec.mu) / spec.sigma
    beta = (spec.b - spec.mu) / spec.sigma
    # invert on the side nearer the bulk so the CDF keeps its precision
    flip = alpha > 0
    if flip:
        alpha, beta = -beta, -alpha
    lo, hi = std_normal_cdf(alpha), std_normal_cdf(beta)
    u = lo + rng.random(n) * (hi - lo)
    z = std_normal_quantile(np.clip(u, np.nextafter(0, 1), np.nextafter(1, 0)))
    if flip:
        z = -z
    return np.clip(spec.mu + spec.sigma * z, spec.a, spec.b)


def sample_beta(alpha: float, beta: float, n: int, rng: np.random.Generator):
    """Beta draws as ``X / (X + Y)`` with ``X ~ Gamma(alpha)``, ``Y ~ Gamma(beta)``."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("shape parameters must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    x = rng.standard_gamma(alpha, n)
    y = rng.standard_gamma(beta, n)
    return x / (x + y)


def gen_simb(case: SimCase, rng: np.random.Generator, n: int = SAMPLE_SIZE):
    """Half the draws from each component, shuffled."""
    first = sample_truncated_normal(case.components[0], n // 2, rng)
    second = sample_truncated_normal(case.components[1], n - n // 2, rng)
    return rng.permutation(np.concatenate([first, second]))


def gen_csimb(case: SimCase | int, simb) -> CategoricalSeries:
    if isinstance(case, int):
        if case not in SIM_CASES:
            raise ValueError(f"unknown simulation case {case}")
        case = SIM_CASES[case]
    x = np.asarray(simb, dtype=float)
    hit = np.zeros(x.shape, dtype=bool)
    for lo, hi in case.intervals:
        hit |= (x >= lo) & (x < hi)
    return CategoricalSeries(hit.astype(np.int64), 2, "csimb")


def case_dataset(case: SimCase, rng: np.random.Generator, n: int = SAMPLE_SIZE) -> Dataset:
    simb = gen_simb(case, rng, n)
    simc = sample_beta(*BETA_SHAPE, n, rng)
    return Dataset(
        {"csimb": gen_csimb(case, simb).codes, "simb": simb, "simc": simc},
        {"csimb": BINARY, "simb": CONTINUOUS, "simc": CONTINUOUS},
    )


def case_config(
    case: SimCase,
    master_seed: int,
    iterations: int = 1000,
    grid_size: int = 100,
    workers: int = 1,
) -> AnalysisConfig:
    return AnalysisConfig(
        response="csimb",
        predictors=("simb", "simc"),
        searches={
            "simb": ThresholdSearch(*case.search_range, grid_size),
            "simc": ThresholdSearch(*SIMC_RANGE, grid_size),
        },
        iterations=iterations,
        master_seed=master_seed,
        workers=workers,
    )


@dataclass(frozen=True)
class CaseOutcome:
    case_id: int
    result: AggregateResult
    data_seed: int
    analysis_seed: int

    def model_aic(self, label: str, total: bool = True) -> float:
        wanted = STUDY_MODELS[label]
        for i, spec in enumerate(self.result.models):
            if self.result.predictor_names(spec) == wanted:
                value = self.result.aics[i]
                return float(self.result.null_aic + value if total else value)
        raise KeyError(label)


@dataclass(frozen=True)
class SimulationStudy:
    master_seed: int
    iterations: int
    grid_size: int
    cases: tuple[CaseOutcome, ...]


def _case_seeds(master_seed: int, case_id: int) -> tuple[int, int]:
    ss = np.random.SeedSequence(master_seed, spawn_key=(case_id,))
    data, analysis = ss.generate_state(2, np.uint64)
    return int(data), int(analysis)


def run_simulation_study(
    master_seed: int,
    iterations: int = 1000,
    grid_size: int = 100,
    workers: int = 1,
    cases=(1, 2, 3),
) -> SimulationStudy:
    """Generate each case's data and run the split analysis on it."""
    outcomes = []
    for case_id in cases:
        case = SIM_CASES[case_id]
        data_seed, analysis_seed = _case_seeds(master_seed, case_id)
        dataset = case_dataset(case, np.random.default_rng(data_seed))
        config = case_config(case, analysis_seed, iterations, grid_size, workers)
        outcomes.append(
            CaseOutcome(case_id, run_analysis(dataset, config), data_seed, analysis_seed)
        )
    return SimulationStudy(master_seed, iterations, grid_size, tuple(outcomes))

