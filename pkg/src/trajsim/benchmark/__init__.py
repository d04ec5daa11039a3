"""Robustness benchmark: dataset transforms, HR@k, scenario runs and reports."""

from __future__ import annotations

from .config import RunConfig, parse_config, run_bench, run_config
from .scenario import (
    REPORT_HEADER,
    BenchmarkReport,
    MeasureRun,
    ReportRow,
    classify_shape,
    dataset_centroid,
    hr_at_k,
    run_scenario,
)
from .transforms import (
    NOISE_DELTAS,
    TransformSpec,
    transform_cardinality,
    transform_length,
    transform_noise,
    transform_sampling,
)

__all__ = [
    "BenchmarkReport",
    "MeasureRun",
    "NOISE_DELTAS",
    "REPORT_HEADER",
    "ReportRow",
    "RunConfig",
    "TransformSpec",
    "classify_shape",
    "dataset_centroid",
    "hr_at_k",
    "parse_config",
    "run_bench",
    "run_config",
    "run_scenario",
    "transform_cardinality",
    "transform_length",
    "transform_noise",
    "transform_sampling",
]
