"""Active-learning classification on the hypersphere with localized kernels.

The pipeline estimates the data distribution's support with an averaged
squared localized kernel, clusters the surviving points by an adjacency
threshold sweep, spends one oracle query per fresh cluster, propagates
labels through consistent clusters, and classifies whatever remains with a
per-class witness-kernel vote.
"""

from .active_loop import (
    GroundTruthOracle,
    LabelOracle,
    LabelState,
    LoopConfig,
    ReplayOracle,
    run_active_loop,
)
from .config import RunConfig, parse_config_file, resolve_config
from .data import (
    BenchmarkSpec,
    RawDataset,
    SyntheticSpec,
    generate_synthetic,
    load_benchmark,
    random_cap_centers,
)
from .errors import (
    ConfigError,
    DataError,
    DegeneratePointError,
    NumericError,
    ParameterError,
    SpherealError,
)
from .experiment import ExperimentReport, render_map, run_experiment
from .graph import AngleGraph, build_components, components_oracle
from .kernels import (
    KernelConfig,
    chebyshev_kernel,
    filter_h,
    jacobi_eval,
    jacobi_kernel,
    jacobi_norm,
)
from .preprocess import angle_matrix, pca_reduce, project_to_sphere
from .support import SupportEstimate, f_estimator, prune_support, support_recovery_harness
from .witness import WitnessModel, build_witness_model, classify_uncertain, witness_classify

__version__ = "0.1.0"

__all__ = [
    "AngleGraph",
    "BenchmarkSpec",
    "ConfigError",
    "DataError",
    "DegeneratePointError",
    "ExperimentReport",
    "GroundTruthOracle",
    "KernelConfig",
    "LabelOracle",
    "LabelState",
    "LoopConfig",
    "NumericError",
    "ParameterError",
    "RawDataset",
    "ReplayOracle",
    "RunConfig",
    "SpherealError",
    "SupportEstimate",
    "SyntheticSpec",
    "WitnessModel",
    "angle_matrix",
    "build_components",
    "build_witness_model",
    "chebyshev_kernel",
    "classify_uncertain",
    "components_oracle",
    "f_estimator",
    "filter_h",
    "generate_synthetic",
    "jacobi_eval",
    "jacobi_kernel",
    "jacobi_norm",
    "load_benchmark",
    "parse_config_file",
    "pca_reduce",
    "project_to_sphere",
    "prune_support",
    "random_cap_centers",
    "render_map",
    "resolve_config",
    "run_active_loop",
    "run_experiment",
    "support_recovery_harness",
    "witness_classify",
]
