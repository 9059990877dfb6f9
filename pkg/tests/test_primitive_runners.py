"""Registered-primitive behavior through the engine: column naming, score
attribution, multivariate combination."""

import math

import numpy as np
import pytest

from tods.engine import execute, execute_steps
from tods.pipeline import build_pipeline
from tods.values import ValueKind

from conftest import make_dataset


def one_step(primitive_id, hyperparams, output_step=None):
    return build_pipeline(
        [(primitive_id, hyperparams, {"data": "inputs.0"})],
        output_step=output_step,
    )


def run_table(ds, primitive_id, hyperparams):
    p = build_pipeline([
        (primitive_id, hyperparams, {"data": "inputs.0"}),
        ("tods.detection.zscore", {}, {"data": 0}),
    ], output_step=1)
    values, _ = execute_steps(p, ds)
    return values[0]


def test_timestamp_validation_reorders_labels_and_index_map():
    ds = make_dataset([10.0, 20.0, 30.0], labels=[1, 0, 0])
    ds = ds.replace(timestamps=np.array([3, 1, 2]))
    table = run_table(ds, "tods.data_processing.timestamp_validation", {})
    assert table.timestamps.tolist() == [1, 2, 3]
    assert table.columns["value"].tolist() == [20.0, 30.0, 10.0]
    assert table.labels.tolist() == [0, 0, 1]
    # each output row keeps the original position it came from
    assert table.row_index_map.tolist() == [1, 2, 0]


def test_difference_lands_on_right_endpoint():
    ds = make_dataset([1.0, 3.0, 6.0, 10.0])
    table = run_table(ds, "tods.timeseries_processing.difference", {"order": 1})
    assert table.columns["value"].tolist() == [2.0, 3.0, 4.0]
    assert table.row_index_map.tolist() == [1, 2, 3]
    assert table.timestamps.tolist() == [1, 2, 3]


def test_window_statistics_prefixes_only_when_multivariate():
    uni = run_table(make_dataset(np.arange(10.0)),
                    "tods.feature_analysis.window_statistics",
                    {"window": 3, "stride": 1})
    assert uni.column_names[:2] == ["mean", "std"]

    multi = run_table(make_dataset(np.arange(20.0).reshape(10, 2)),
                      "tods.feature_analysis.window_statistics",
                      {"window": 3, "stride": 1})
    assert "f0_mean" in multi.column_names and "f1_mean" in multi.column_names


def test_autocorrelation_runner_emits_lag_columns():
    ds = make_dataset(np.sin(np.arange(60.0)))
    table = run_table(ds, "tods.feature_analysis.autocorrelation",
                      {"window": 20, "stride": 1, "max_lag": 3})
    assert table.column_names == ["acf_1", "acf_2", "acf_3"]
    assert table.n_rows == 41
    assert table.row_index_map.tolist() == list(range(41))


def test_segment_runner_unrolls_window_positions():
    ds = make_dataset(np.arange(8.0))
    table = run_table(ds, "tods.timeseries_processing.segment_subsequences",
                      {"window": 4, "stride": 2})
    assert table.column_names == ["t0", "t1", "t2", "t3"]
    assert table.row_index_map.tolist() == [0, 2, 4]
    assert table.columns["t3"].tolist() == [3.0, 5.0, 7.0]


def test_nmf_runner_outputs_residual_column():
    rng = np.random.default_rng(0)
    ds = make_dataset(rng.normal(size=(40, 3)))
    table = run_table(ds, "tods.feature_analysis.nmf", {"rank": 2, "seed": 1})
    assert table.column_names == ["nmf_residual"]
    assert np.isfinite(table.columns["nmf_residual"]).all()


def test_multivariate_zscore_takes_columnwise_max():
    values = np.zeros((50, 2))
    values[:, 0] = np.random.default_rng(0).normal(size=50)
    values[:, 1] = np.random.default_rng(1).normal(size=50)
    values[10, 0] = 40.0  # spike in the first column only
    ds = make_dataset(values)

    combined, _ = execute(one_step("tods.detection.zscore", {}), ds)
    col0, _ = execute(one_step("tods.detection.zscore", {}),
                      make_dataset(values[:, 0]))
    col1, _ = execute(one_step("tods.detection.zscore", {}),
                      make_dataset(values[:, 1]))
    expected = np.fmax(col0.scores, col1.scores)
    assert np.allclose(combined.scores, expected, atol=1e-12)
    assert int(np.nanargmax(combined.scores)) == 10


def test_matrix_profile_scores_cover_full_length():
    ds = make_dataset(np.sin(np.arange(80.0)))
    value, _ = execute(one_step("tods.detection.matrix_profile", {"window": 8}), ds)
    assert value.kind == ValueKind.SCORES
    assert len(value.scores) == 80
    assert np.isnan(value.scores[-7:]).all()  # no window starts in the tail
    assert np.isfinite(value.scores[:73]).any()


def test_window_scores_attribute_to_start_indices():
    x = np.zeros(30)
    x[20] = 25.0
    ds = make_dataset(x)
    p = build_pipeline([
        ("tods.feature_analysis.window_statistics",
         {"window": 5, "stride": 5}, {"data": "inputs.0"}),
        ("tods.detection.zscore", {}, {"data": 0}),
    ], output_step=1)
    value, _ = execute(p, ds)
    # six windows, scored at starts 0,5,...,25; the spike is in window start 20
    finite = np.flatnonzero(~np.isnan(value.scores))
    assert finite.tolist() == [0, 5, 10, 15, 20, 25]
    assert int(np.nanargmax(value.scores)) == 20


def test_ar_runner_scores_with_nan_head():
    ds = make_dataset(np.sin(np.arange(50.0) * 0.3))
    value, _ = execute(one_step("tods.detection.ar_residual", {"order": 4}), ds)
    assert np.isnan(value.scores[:4]).all()
    assert np.isfinite(value.scores[4:]).all()


def test_impute_runner_fills_table_nans():
    ds = make_dataset([1.0, math.nan, 3.0])
    table = run_table(ds, "tods.data_processing.impute_missing",
                      {"strategy": "linear"})
    assert table.columns["value"].tolist() == [1.0, 2.0, 3.0]


def test_threshold_runner_produces_labels(bench):
    p = build_pipeline([
        ("tods.detection.zscore", {}, {"data": "inputs.0"}),
        ("tods.detection.threshold", {"contamination": 0.01}, {"scores": 0}),
    ])
    value, _ = execute(p, bench)
    assert value.kind == ValueKind.LABELS
    assert value.labels.sum() == 4  # ceil(0.01 * 400)


def test_rule_filter_runner_overrides_labels(bench):
    rules = [{"predicate": {"kind": "time_in",
                            "args": [0, float(bench.timestamps[-1])]},
              "action": "force_normal"}]
    p = build_pipeline([
        ("tods.detection.zscore", {}, {"data": "inputs.0"}),
        ("tods.detection.threshold", {"contamination": 0.05}, {"scores": 0}),
        ("tods.reinforcement.rule_based_filter", {"rules": rules},
         {"labels": 1, "dataset": "inputs.0"}),
    ])
    value, _ = execute(p, bench)
    assert value.labels.sum() == 0  # everything forced back to normal


def test_seasonal_runner_splits_into_three_columns(bench):
    table = run_table(bench, "tods.timeseries_processing.seasonal_decomposition",
                      {"period": 25})
    assert table.column_names == ["trend", "seasonal", "residual"]
    assert table.n_rows == bench.n
