"""Distributional representations of continuous glucose monitoring data.

Glucose records are turned into densities and quantile functions, then
analysed in 2-Wasserstein geometry: Frechet means and variances, regression in
both directions, distance-based ANOVA and energy tests, k-groups clustering,
and a time-in-range compositional baseline.
"""

__version__ = "0.1.0"

from .baseline import ADA, Composition, CutoffScheme, decile_cutoffs, ilr_transform, knn_regress, tir_composition
from .clustering import ClusteringResult, kgroups_cluster, within_objective
from .densities import (
    Glucodensity,
    QuantileFunction,
    density_to_quantile,
    empirical_quantile,
    estimate_glucodensity,
    rule_of_thumb_bandwidth,
)
from .inference import (
    GroupedSample,
    TestResult,
    anova_statistic,
    anova_test,
    energy_permutation_test,
    energy_statistic,
    k_sample_energy,
)
from .ingest import CgmRecord, CgmSeries, clean_series, parse_cgm_csv
from .regression import (
    FrechetRegressionModel,
    ScalarOnDistTraining,
    frechet_fit,
    frechet_predict,
    frechet_r2,
    loocv_r2,
    nw_cv_bandwidth,
    nw_predict,
)
from .simulate import CohortConfig, simulate_cohort
from .wasserstein import DistanceMatrix, distance_matrix, frechet_mean, frechet_variance, w2_distance
