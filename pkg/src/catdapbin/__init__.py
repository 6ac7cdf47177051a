"""Binary discretization of continuous variables for AIC-based categorical data analysis."""

__version__ = "0.1.0"

from .discretize import (
    ThresholdGrid,
    ThresholdResult,
    best_equal_width_histogram,
    best_threshold,
    binarize,
    histogram_aic,
    make_grid,
)
from .pipeline import (
    AggregateResult,
    AnalysisConfig,
    Dataset,
    IterationResult,
    ThresholdSearch,
    final_binarize,
    full_data_scores,
    rank_models,
    run_analysis,
    run_iteration,
    split_half,
)
from .stats import (
    ChiSquareResult,
    chi_square_2x2,
    chi_square_upper_tail,
    std_normal_cdf,
    std_normal_quantile,
)
from .tables import (
    CategoricalSeries,
    ContingencyTable,
    ModelScore,
    ModelSpec,
    aic_conditional,
    aic_null,
    build_table,
    delta_aic_2x2,
    enumerate_models,
)
