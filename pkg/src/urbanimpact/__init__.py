"""City-level automation impact, labor specialization, and scaling analytics."""

from .corpus import (
    Corpus,
    Covariates,
    add_prob_source,
    aggregate_cities,
    load_cluster_csv,
    load_corpus,
    select_extreme_cities,
    write_corpus,
)
from .metrics import (
    CityMetrics,
    Distribution,
    city_metrics_table,
    city_skill_distribution,
    employment_share,
    expected_impact,
    job_skill_entropy,
    normalized_shannon_entropy,
    theil,
)
from .shift import (
    ShiftRecord,
    ShiftReport,
    group_shift,
    occupation_shift,
    rank_shift_records,
)
from .scaling import (
    ScalingFit,
    StabilityResult,
    bootstrap_beta,
    cluster_scaling,
    fit_power_law,
    loglog_plot_points,
    scaling_stability,
)
from .clustering import (
    ClusterAssignment,
    FeatureMatrix,
    ZScoreProfile,
    job_clusters,
    kmeans,
    pca_project,
    skill_clusters,
    skill_zscore_profile,
)
from .stats import (
    BinnedProfile,
    CorrelationResult,
    RegressionFit,
    binned_profile,
    ols,
    pearson,
    regression_suite,
    residual_ranking,
    skill_correlation_table,
    split_validation,
)
from .robustness import RobustnessRun, noise_experiment, removal_experiment

__version__ = "0.1.0"

__all__ = [
    "Corpus", "Covariates", "add_prob_source", "aggregate_cities",
    "load_cluster_csv", "load_corpus", "select_extreme_cities", "write_corpus",
    "CityMetrics", "Distribution", "city_metrics_table",
    "city_skill_distribution", "employment_share", "expected_impact",
    "job_skill_entropy", "normalized_shannon_entropy", "theil",
    "ShiftRecord", "ShiftReport", "group_shift", "occupation_shift",
    "rank_shift_records",
    "ScalingFit", "StabilityResult", "bootstrap_beta", "cluster_scaling",
    "fit_power_law", "loglog_plot_points", "scaling_stability",
    "ClusterAssignment", "FeatureMatrix", "ZScoreProfile", "job_clusters",
    "kmeans", "pca_project", "skill_clusters", "skill_zscore_profile",
    "BinnedProfile", "CorrelationResult", "RegressionFit", "binned_profile",
    "ols", "pearson", "regression_suite", "residual_ranking",
    "skill_correlation_table", "split_validation",
    "RobustnessRun", "noise_experiment", "removal_experiment",
    "__version__",
]
