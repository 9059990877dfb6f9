"""Time-series outlier detection: composable primitives, portable pipeline
descriptions, an evaluation harness, automated pipeline search, a CLI, and
an HTTP service for the pipeline-builder UI.
"""

from .benchmark import dataset_to_csv, make_spike_benchmark
from .dataset import TimeSeriesDataset, generate_dataset
from .engine import execute, execute_steps, validate
from .errors import TodsError
from .evaluation import (
    Holdout,
    KFold,
    ScoreReport,
    combine_reports,
    evaluate_pipeline,
    make_splits,
    score,
)
from .pipeline import (
    PipelineDescription,
    build_pipeline,
    load_pipeline,
    parse_pipeline,
    serialize_pipeline,
)
from .registry import PrimitiveDescriptor, get_primitive, registry_list
from .search import (
    SearchSpace,
    default_pipeline,
    default_space,
    enumerate_space,
    export_best,
    parse_space,
    search,
)
from .values import ExecContext, LabelsValue, ScoresValue, TableValue, ValueKind

__version__ = "0.1.0"

__all__ = [
    "ExecContext",
    "Holdout",
    "KFold",
    "LabelsValue",
    "PipelineDescription",
    "PrimitiveDescriptor",
    "ScoreReport",
    "ScoresValue",
    "SearchSpace",
    "TableValue",
    "TimeSeriesDataset",
    "TodsError",
    "ValueKind",
    "__version__",
    "build_pipeline",
    "combine_reports",
    "dataset_to_csv",
    "default_pipeline",
    "default_space",
    "enumerate_space",
    "evaluate_pipeline",
    "execute",
    "execute_steps",
    "export_best",
    "generate_dataset",
    "get_primitive",
    "load_pipeline",
    "make_spike_benchmark",
    "make_splits",
    "parse_pipeline",
    "parse_space",
    "registry_list",
    "score",
    "search",
    "serialize_pipeline",
    "validate",
]
