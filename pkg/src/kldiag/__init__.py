"""Open-set fault classification of residual time series.

Batches of multivariate residual data are modeled as Gaussian pdfs; the
Kullback-Leibler divergence to the nearest training pdf of each fault class
measures how distinguishable new data is from that class.  One-class
thresholds tuned on within-class statistics turn those distances into an
open-set classifier that can also flag faults outside the training set, and
mixture matching over the nearest labeled pdfs estimates fault sizes.
"""

from .batching import Batch, ResidualSeries, partition
from .classifier import DiagnosisOutput, Verdict, classify, classify_stream
from .dataset import (
    NF_LABEL,
    LabeledScenario,
    SyntheticBenchConfig,
    corpus_pdfs,
    generate_bench,
    load_csv,
    scenario_pdfs,
    split,
    write_csv,
)
from .divergence import GaussianMixture, kl_gaussian, kl_monte_carlo
from .errors import ConfigError, DataError
from .gaussian import (
    GaussianPdf,
    estimate_gaussian,
    estimate_gaussian_trimmed,
    regularize_covariance,
)
from .modes import (
    ClusteredIndex,
    FaultMode,
    ModeRegistry,
    build_search_index,
    distinguishability,
    ordered_subset,
    pruned_search,
    quantile_report,
    within_class,
)
from .serialize import load_registry, registry_from_dict, registry_to_dict, save_registry
from .size_estimation import (
    SizeEstimate,
    baseline_mean_size,
    estimate_for_diagnosis,
    estimate_size,
)
from .thresholds import KdeDistribution, OneClassModel, fit_kde, select_threshold, tune

__version__ = "0.1.0"

__all__ = [
    "Batch",
    "ClusteredIndex",
    "ConfigError",
    "DataError",
    "DiagnosisOutput",
    "FaultMode",
    "GaussianMixture",
    "GaussianPdf",
    "KdeDistribution",
    "LabeledScenario",
    "ModeRegistry",
    "NF_LABEL",
    "OneClassModel",
    "ResidualSeries",
    "SizeEstimate",
    "SyntheticBenchConfig",
    "Verdict",
    "baseline_mean_size",
    "build_search_index",
    "classify",
    "classify_stream",
    "corpus_pdfs",
    "distinguishability",
    "estimate_for_diagnosis",
    "estimate_gaussian",
    "estimate_gaussian_trimmed",
    "estimate_size",
    "fit_kde",
    "generate_bench",
    "kl_gaussian",
    "kl_monte_carlo",
    "load_csv",
    "load_registry",
    "ordered_subset",
    "partition",
    "pruned_search",
    "quantile_report",
    "regularize_covariance",
    "registry_from_dict",
    "registry_to_dict",
    "save_registry",
    "scenario_pdfs",
    "select_threshold",
    "split",
    "tune",
    "within_class",
    "write_csv",
]
