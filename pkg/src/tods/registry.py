"""Primitive registry: descriptors, hyperparameter schemas, and runners.

Every composable primitive is described once here — its dotted id, family,
hyperparameter schema with defaults, argument kinds, and the runner that
executes it over pipeline values. The registry is assembled at import and
read-only afterwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .dataset import TimeSeriesDataset
from .errors import HyperparamOutOfRange, SeriesTooShort, UnknownPrimitive
from .primitives import detection, features, processing
from .primitives.detection import Rule
from .values import ExecContext, LabelsValue, ScoresValue, TableValue, Value, ValueKind


class Family(str, enum.Enum):
    DATA_PROCESSING = "DataProcessing"
    TIMESERIES_PROCESSING = "TimeSeriesProcessing"
    FEATURE_ANALYSIS = "FeatureAnalysis"
    DETECTION = "DetectionAlgorithm"
    REINFORCEMENT = "Reinforcement"


_FAMILY_ORDER = {f: i for i, f in enumerate(Family)}


@dataclass(frozen=True)
class HyperparamSpec:
    """Declared type, default, and admissible values of one hyperparameter."""

    type: str  # int | float | bool | enum | float_list | rules
    default: Any
    lo: float | None = None
    hi: float | None = None
    choices: tuple[str, ...] | None = None

    def validate(self, name: str, value):
        """Check and normalize a candidate value; raises HyperparamOutOfRange."""
        if self.type == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise HyperparamOutOfRange(f"{name} must be an integer, got {value!r}")
            self._check_range(name, value)
            return value
        if self.type == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise HyperparamOutOfRange(f"{name} must be a number, got {value!r}")
            value = float(value)
            if not np.isfinite(value):
                raise HyperparamOutOfRange(f"{name} must be finite, got {value!r}")
            self._check_range(name, value)
            return value
        if self.type == "bool":
            if not isinstance(value, bool):
                raise HyperparamOutOfRange(f"{name} must be a boolean, got {value!r}")
            return value
        if self.type == "enum":
            if value not in self.choices:
                raise HyperparamOutOfRange(
                    f"{name} must be one of {list(self.choices)}, got {value!r}")
            return value
        if self.type == "float_list":
            if not isinstance(value, list) or any(
                    isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
                raise HyperparamOutOfRange(f"{name} must be a list of numbers, got {value!r}")
            return [float(v) for v in value]
        if self.type == "rules":
            return normalize_rules(value)
        raise AssertionError(f"unhandled hyperparameter type {self.type!r}")

    def _check_range(self, name: str, value):
        if self.lo is not None and value < self.lo:
            raise HyperparamOutOfRange(f"{name} must be >= {self.lo}, got {value}")
        if self.hi is not None and value > self.hi:
            raise HyperparamOutOfRange(f"{name} must be <= {self.hi}, got {value}")

    def schema_json(self) -> dict:
        out: dict[str, Any] = {"type": self.type, "default": self.default}
        if self.lo is not None or self.hi is not None:
            out["range"] = [self.lo, self.hi]
        if self.choices is not None:
            out["enum"] = list(self.choices)
        return out


_PREDICATES = ("in_range", "outside_range", "time_in")
_ACTIONS = ("force_normal", "force_outlier")


def normalize_rules(value) -> list[dict]:
    """Validate and canonicalize the reinforcement `rules` hyperparameter.

    Wire form per rule: {feature?, predicate: {kind, args: [lo, hi]}, action};
    feature defaults to "prediction" and is materialized explicitly.
    """
    if not isinstance(value, list):
        raise HyperparamOutOfRange(f"rules must be a list, got {value!r}")
    out = []
    for i, item in enumerate(value):
        if not isinstance(item, dict):
            raise HyperparamOutOfRange(f"rule {i} must be an object, got {item!r}")
        unknown = set(item) - {"feature", "predicate", "action"}
        if unknown:
            raise HyperparamOutOfRange(f"rule {i} has unknown keys {sorted(unknown)}")
        predicate = item.get("predicate")
        if (not isinstance(predicate, dict) or set(predicate) != {"kind", "args"}
                or predicate["kind"] not in _PREDICATES):
            raise HyperparamOutOfRange(
                f"rule {i} predicate must be {{kind: one of {list(_PREDICATES)}, args: [lo, hi]}}")
        args = predicate["args"]
        if (not isinstance(args, list) or len(args) != 2 or any(
                isinstance(a, bool) or not isinstance(a, (int, float)) for a in args)):
            raise HyperparamOutOfRange(f"rule {i} predicate args must be two numbers")
        lo, hi = float(args[0]), float(args[1])
        if lo > hi:
            raise HyperparamOutOfRange(f"rule {i} bounds disagree: {lo} > {hi}")
        action = item.get("action")
        if action not in _ACTIONS:
            raise HyperparamOutOfRange(f"rule {i} action must be one of {list(_ACTIONS)}")
        feature = item.get("feature", "prediction")
        if not isinstance(feature, str):
            raise HyperparamOutOfRange(f"rule {i} feature must be a string")
        out.append({
            "action": action,
            "feature": feature,
            "predicate": {"args": [lo, hi], "kind": predicate["kind"]},
        })
    return out


def rules_from_json(rules_json: list[dict]) -> list[Rule]:
    return [
        Rule(
            predicate=r["predicate"]["kind"],
            action=r["action"],
            feature=r["feature"],
            lo=r["predicate"]["args"][0],
            hi=r["predicate"]["args"][1],
        )
        for r in rules_json
    ]


@dataclass(frozen=True)
class PrimitiveDescriptor:
    id: str
    family: Family
    hyperparams: dict[str, HyperparamSpec]
    arguments: dict[str, ValueKind]
    produces: ValueKind
    runner: Callable[[dict, dict, ExecContext], Value] = field(repr=False)

    def defaults(self) -> dict:
        return {name: spec.default for name, spec in self.hyperparams.items()}

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "family": self.family.value,
            "produces": self.produces.value,
            "arguments": {name: kind.value for name, kind in self.arguments.items()},
            "hyperparam_schema": {
                name: spec.schema_json() for name, spec in self.hyperparams.items()
            },
        }


# --- runner helpers ---------------------------------------------------------

def _as_dataset(tv: TableValue) -> TimeSeriesDataset:
    return TimeSeriesDataset(
        timestamps=tv.timestamps, features=dict(tv.columns), labels=tv.labels)


def _per_column(tv: TableValue) -> list[tuple[str, str, np.ndarray]]:
    """(column, output-name prefix, values); prefixes only when multivariate."""
    multi = len(tv.columns) > 1
    return [(c, f"{c}_" if multi else "", v) for c, v in tv.columns.items()]


def _combine_max(per_column_scores: list[np.ndarray]) -> np.ndarray:
    """Elementwise max across columns, ignoring NaN; all-NaN rows stay NaN."""
    stacked = np.column_stack(per_column_scores)
    finite = ~np.isnan(stacked)
    out = np.full(len(stacked), np.nan)
    any_finite = finite.any(axis=1)
    guarded = np.where(finite, stacked, -np.inf)
    out[any_finite] = guarded[any_finite].max(axis=1)
    return out


def _windowed_rows(tv: TableValue, starts: np.ndarray) -> TableValue:
    """Row metadata for a per-window table whose row i starts at starts[i]."""
    return TableValue(
        timestamps=tv.timestamps[starts],
        columns={},
        row_index_map=tv.row_index_map[starts],
        labels=None if tv.labels is None else tv.labels[starts],
    )


def _finite_rows(matrix: np.ndarray) -> np.ndarray:
    return np.isfinite(matrix).all(axis=1)


# --- runners ----------------------------------------------------------------

def _run_timestamp_validation(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    out_ds, order = processing.timestamp_validation(
        _as_dataset(tv), policy=hp["policy"], duplicate_policy=hp["duplicate_policy"])
    return TableValue(
        timestamps=out_ds.timestamps,
        columns=dict(out_ds.features),
        row_index_map=tv.row_index_map[order],
        labels=out_ds.labels,
    )


def _run_impute_missing(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    out_ds = processing.impute_missing(_as_dataset(tv), strategy=hp["strategy"])
    return tv.with_columns(dict(out_ds.features))


def _run_seasonal_decomposition(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    columns = {}
    for _, prefix, x in _per_column(tv):
        trend, seasonal, residual = processing.seasonal_decomposition(
            x, period=hp["period"], model=hp["model"])
        columns[f"{prefix}trend"] = trend
        columns[f"{prefix}seasonal"] = seasonal
        columns[f"{prefix}residual"] = residual
    return tv.with_columns(columns)


def _run_moving_average(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    columns = {
        c: processing.moving_average(v, window=hp["window"], mode=hp["mode"])
        for c, v in tv.columns.items()
    }
    return tv.with_columns(columns)


def _run_difference(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    order = hp["order"]
    columns = {c: processing.difference(v, order=order) for c, v in tv.columns.items()}
    # a difference value lands on the right endpoint of its span
    return TableValue(
        timestamps=tv.timestamps[order:],
        columns=columns,
        row_index_map=tv.row_index_map[order:],
        labels=None if tv.labels is None else tv.labels[order:],
    )


def _run_standardize(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    ds = _as_dataset(tv)
    fit_rows = np.flatnonzero(ctx.train_mask(tv.row_index_map))
    transform = processing.standardize_fit(ds, rows=fit_rows)
    return tv.with_columns(dict(transform.produce(ds).features))


def _run_segment_subsequences(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    columns = {}
    starts = None
    for c, prefix, x in _per_column(tv):
        matrix, starts = processing.segment_subsequences(
            x, window=hp["window"], stride=hp["stride"])
        for j in range(matrix.shape[1]):
            columns[f"{prefix}t{j}"] = matrix[:, j]
    return _windowed_rows(tv, starts).with_columns(columns)


def _run_autocorrelation(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    columns = {}
    starts = None
    for _, prefix, x in _per_column(tv):
        matrix, starts = processing.segment_subsequences(
            x, window=hp["window"], stride=hp["stride"])
        rows = np.empty((len(matrix), hp["max_lag"]))
        for i in range(len(matrix)):
            rows[i] = features.autocorrelation(matrix[i], hp["max_lag"])[1:]
        for j in range(hp["max_lag"]):
            columns[f"{prefix}acf_{j + 1}"] = rows[:, j]
    return _windowed_rows(tv, starts).with_columns(columns)


def _run_window_statistics(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    columns = {}
    starts = None
    for _, prefix, x in _per_column(tv):
        table = features.window_statistics(x, window=hp["window"], stride=hp["stride"])
        starts = table.row_index_map
        for j, stat in enumerate(table.column_names):
            columns[f"{prefix}{stat}"] = table.rows[:, j]
    return _windowed_rows(tv, starts).with_columns(columns)


def _run_dft_magnitudes(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    columns = {}
    starts = None
    for _, prefix, x in _per_column(tv):
        table = features.dft_magnitudes(
            x, window=hp["window"], stride=hp["stride"], n_bins=hp["n_bins"])
        starts = table.row_index_map
        for j, name in enumerate(table.column_names):
            columns[f"{prefix}{name}"] = table.rows[:, j]
    return _windowed_rows(tv, starts).with_columns(columns)


def _run_nmf(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    matrix = tv.matrix()
    keep = _finite_rows(matrix)
    V = matrix[keep]
    if hp["shift"] == "min_to_zero" and len(V) and V.min() < 0:
        V = V - V.min()
    W, H, _ = features.nmf_fit(
        V, rank=hp["rank"], max_iter=hp["max_iter"], tol=hp["tol"], seed=hp["seed"])
    residual = features.nmf_residual_features(V, W, H)
    rows = np.flatnonzero(keep)
    return _windowed_rows(tv, rows).with_columns({"nmf_residual": residual})


def _run_zscore(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    fit = ctx.train_mask(tv.row_index_map)
    per_col = []
    for _, _, x in _per_column(tv):
        sample = x[fit]
        if np.isfinite(sample).sum() < 2:
            raise SeriesTooShort("z-score needs at least 2 observed fit points")
        mu = np.nanmean(sample)
        sigma = np.nanstd(sample)
        per_col.append(np.abs(x - mu) / max(sigma, processing.STD_EPS))
    return ScoresValue.from_rows(_combine_max(per_col), tv.row_index_map, ctx.n_original)


def _run_iforest(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    matrix = tv.matrix()
    finite = _finite_rows(matrix)
    fit = finite & ctx.train_mask(tv.row_index_map)
    model = detection.iforest_fit(
        matrix[fit], n_trees=hp["n_trees"],
        subsample_size=hp["subsample_size"], seed=hp["seed"])
    row_scores = np.full(len(matrix), np.nan)
    row_scores[finite] = detection.iforest_score(model, matrix[finite])
    return ScoresValue.from_rows(row_scores, tv.row_index_map, ctx.n_original)


def _run_knn(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    matrix = tv.matrix()
    finite = _finite_rows(matrix)
    row_scores = np.full(len(matrix), np.nan)
    row_scores[finite] = detection.knn_scores(matrix[finite], k=hp["k"])
    return ScoresValue.from_rows(row_scores, tv.row_index_map, ctx.n_original)


def _run_ar_residual(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    per_col = [
        detection.ar_residual_scores(x, order=hp["order"], train_fraction=hp["train_fraction"])
        for _, _, x in _per_column(tv)
    ]
    return ScoresValue.from_rows(_combine_max(per_col), tv.row_index_map, ctx.n_original)


def _run_matrix_profile(hp, inputs, ctx):
    tv: TableValue = inputs["data"]
    per_col = []
    for _, _, x in _per_column(tv):
        profile = detection.matrix_profile_discord(x, window=hp["window"])
        padded = np.full(tv.n_rows, np.nan)
        padded[:len(profile)] = profile
        per_col.append(padded)
    return ScoresValue.from_rows(_combine_max(per_col), tv.row_index_map, ctx.n_original)


def _run_threshold(hp, inputs, ctx):
    sv: ScoresValue = inputs["scores"]
    return LabelsValue(detection.threshold_labels(sv.scores, hp["contamination"]))


def _run_rule_based_filter(hp, inputs, ctx):
    lv: LabelsValue = inputs["labels"]
    tv: TableValue = inputs["dataset"]
    rules = rules_from_json(hp["rules"])
    return LabelsValue(detection.rule_based_filter(lv.labels, _as_dataset(tv), rules))


# --- catalog ----------------------------------------------------------------

def _int(default, lo=1, hi=100000):
    return HyperparamSpec(type="int", default=default, lo=lo, hi=hi)


def _float(default, lo, hi):
    return HyperparamSpec(type="float", default=default, lo=lo, hi=hi)


def _enum(default, *choices):
    return HyperparamSpec(type="enum", default=default, choices=choices)


_TABLE_IN = {"data": ValueKind.TABLE}

_DESCRIPTORS = [
    PrimitiveDescriptor(
        id="tods.data_processing.timestamp_validation",
        family=Family.DATA_PROCESSING,
        hyperparams={
            "policy": _enum("sort", "sort", "error"),
            "duplicate_policy": _enum("keep_first", "keep_first", "error"),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_timestamp_validation,
    ),
    PrimitiveDescriptor(
        id="tods.data_processing.impute_missing",
        family=Family.DATA_PROCESSING,
        hyperparams={"strategy": _enum("linear", "mean", "forward_fill", "linear")},
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_impute_missing,
    ),
    PrimitiveDescriptor(
        id="tods.timeseries_processing.seasonal_decomposition",
        family=Family.TIMESERIES_PROCESSING,
        hyperparams={
            "period": _int(12, lo=2, hi=10000),
            "model": _enum("additive", "additive"),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_seasonal_decomposition,
    ),
    PrimitiveDescriptor(
        id="tods.timeseries_processing.moving_average",
        family=Family.TIMESERIES_PROCESSING,
        hyperparams={
            "window": _int(5, lo=1, hi=10000),
            "mode": _enum("centered_truncated", "centered_truncated"),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_moving_average,
    ),
    PrimitiveDescriptor(
        id="tods.timeseries_processing.difference",
        family=Family.TIMESERIES_PROCESSING,
        hyperparams={"order": _int(1, lo=1, hi=10)},
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_difference,
    ),
    PrimitiveDescriptor(
        id="tods.timeseries_processing.standardize",
        family=Family.TIMESERIES_PROCESSING,
        hyperparams={},
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_standardize,
    ),
    PrimitiveDescriptor(
        id="tods.timeseries_processing.segment_subsequences",
        family=Family.TIMESERIES_PROCESSING,
        hyperparams={"window": _int(10, lo=1, hi=10000), "stride": _int(1, lo=1, hi=10000)},
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_segment_subsequences,
    ),
    PrimitiveDescriptor(
        id="tods.feature_analysis.autocorrelation",
        family=Family.FEATURE_ANALYSIS,
        hyperparams={
            "window": _int(20, lo=2, hi=10000),
            "stride": _int(1, lo=1, hi=10000),
            "max_lag": _int(5, lo=1, hi=100),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_autocorrelation,
    ),
    PrimitiveDescriptor(
        id="tods.feature_analysis.window_statistics",
        family=Family.FEATURE_ANALYSIS,
        hyperparams={"window": _int(10, lo=1, hi=10000), "stride": _int(1, lo=1, hi=10000)},
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_window_statistics,
    ),
    PrimitiveDescriptor(
        id="tods.feature_analysis.dft_magnitudes",
        family=Family.FEATURE_ANALYSIS,
        hyperparams={
            "window": _int(16, lo=2, hi=10000),
            "stride": _int(1, lo=1, hi=10000),
            "n_bins": _int(4, lo=1, hi=5000),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_dft_magnitudes,
    ),
    PrimitiveDescriptor(
        id="tods.feature_analysis.nmf",
        family=Family.FEATURE_ANALYSIS,
        hyperparams={
            "rank": _int(2, lo=1, hi=100),
            "max_iter": _int(200, lo=1, hi=10000),
            "tol": _float(1e-6, lo=0.0, hi=1.0),
            "seed": _int(0, lo=0, hi=2**32 - 1),
            "shift": _enum("min_to_zero", "none", "min_to_zero"),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.TABLE,
        runner=_run_nmf,
    ),
    PrimitiveDescriptor(
        id="tods.detection.zscore",
        family=Family.DETECTION,
        hyperparams={},
        arguments=_TABLE_IN,
        produces=ValueKind.SCORES,
        runner=_run_zscore,
    ),
    PrimitiveDescriptor(
        id="tods.detection.iforest",
        family=Family.DETECTION,
        hyperparams={
            "n_trees": _int(100, lo=1, hi=1000),
            "subsample_size": _int(64, lo=2, hi=10000),
            "seed": _int(0, lo=0, hi=2**32 - 1),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.SCORES,
        runner=_run_iforest,
    ),
    PrimitiveDescriptor(
        id="tods.detection.knn",
        family=Family.DETECTION,
        hyperparams={"k": _int(5, lo=1, hi=10000)},
        arguments=_TABLE_IN,
        produces=ValueKind.SCORES,
        runner=_run_knn,
    ),
    PrimitiveDescriptor(
        id="tods.detection.ar_residual",
        family=Family.DETECTION,
        hyperparams={
            "order": _int(3, lo=1, hi=100),
            "train_fraction": _float(1.0, lo=0.01, hi=1.0),
        },
        arguments=_TABLE_IN,
        produces=ValueKind.SCORES,
        runner=_run_ar_residual,
    ),
    PrimitiveDescriptor(
        id="tods.detection.matrix_profile",
        family=Family.DETECTION,
        hyperparams={"window": _int(16, lo=1, hi=10000)},
        arguments=_TABLE_IN,
        produces=ValueKind.SCORES,
        runner=_run_matrix_profile,
    ),
    PrimitiveDescriptor(
        id="tods.detection.threshold",
        family=Family.DETECTION,
        hyperparams={"contamination": _float(0.01, lo=0.0, hi=1.0)},
        arguments={"scores": ValueKind.SCORES},
        produces=ValueKind.LABELS,
        runner=_run_threshold,
    ),
    PrimitiveDescriptor(
        id="tods.reinforcement.rule_based_filter",
        family=Family.REINFORCEMENT,
        hyperparams={"rules": HyperparamSpec(type="rules", default=[])},
        arguments={"labels": ValueKind.LABELS, "dataset": ValueKind.TABLE},
        produces=ValueKind.LABELS,
        runner=_run_rule_based_filter,
    ),
]

REGISTRY: dict[str, PrimitiveDescriptor] = {d.id: d for d in _DESCRIPTORS}
assert len(REGISTRY) == len(_DESCRIPTORS), "duplicate primitive id"


def registry_list() -> list[PrimitiveDescriptor]:
    """All primitives, ordered by family (pipeline stage order) then id."""
    return sorted(REGISTRY.values(), key=lambda d: (_FAMILY_ORDER[d.family], d.id))


def get_primitive(primitive_id: str) -> PrimitiveDescriptor:
    try:
        return REGISTRY[primitive_id]
    except KeyError:
        raise UnknownPrimitive(primitive_id) from None
