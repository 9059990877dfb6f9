import math
import statistics

import numpy as np
import pytest

from tods.errors import (
    AllMissingColumn,
    DuplicateTimestamp,
    NonPositivePeriod,
    OrderTooLarge,
    PeriodTooLarge,
    UnsortedTimestamps,
    WindowTooLarge,
)
from tods.primitives.processing import (
    difference,
    impute_missing,
    moving_average,
    seasonal_decomposition,
    segment_subsequences,
    standardize_fit,
    timestamp_validation,
)

from conftest import make_dataset


# --- independent oracles (explicit loops, no numpy vectorization) -----------

def centered_ma_oracle(xs, period):
    """Classical decomposition trend: one-period centered mean, straddle-averaged
    for even periods. Pure-python reference."""
    n = len(xs)
    half = period // 2
    out = [math.nan] * n
    for t in range(half, n - half):
        if period % 2 == 1:
            out[t] = statistics.fmean(xs[t - half:t + half + 1])
        else:
            a = statistics.fmean(xs[t - half:t + half])
            b = statistics.fmean(xs[t - half + 1:t + half + 1])
            out[t] = (a + b) / 2
    return out


def truncated_ma_oracle(xs, window):
    n = len(xs)
    half = window // 2
    return [statistics.fmean(xs[max(0, t - half):min(n, t + half + 1)]) for t in range(n)]


# --- timestamp validation ----------------------------------------------------

def test_sort_policy_reorders_stably():
    ds = make_dataset([10.0, 20.0, 30.0])
    ds = ds.replace(timestamps=np.array([5, 1, 3]))
    fixed, kept = timestamp_validation(ds)
    assert fixed.timestamps.tolist() == [1, 3, 5]
    assert fixed.features["value"].tolist() == [20.0, 30.0, 10.0]
    assert kept.tolist() == [1, 2, 0]


def test_error_policy_rejects_unsorted():
    ds = make_dataset([1.0, 2.0]).replace(timestamps=np.array([2, 1]))
    with pytest.raises(UnsortedTimestamps):
        timestamp_validation(ds, policy="error")


def test_duplicates_keep_first():
    ds = make_dataset([1.0, 2.0, 3.0]).replace(timestamps=np.array([1, 1, 2]))
    fixed, kept = timestamp_validation(ds)
    assert fixed.timestamps.tolist() == [1, 2]
    assert fixed.features["value"].tolist() == [1.0, 3.0]
    assert kept.tolist() == [0, 2]


def test_duplicates_error_policy():
    ds = make_dataset([1.0, 2.0]).replace(timestamps=np.array([4, 4]))
    with pytest.raises(DuplicateTimestamp):
        timestamp_validation(ds, duplicate_policy="error")


def test_valid_input_passes_through():
    ds = make_dataset([1.0, 2.0], labels=[0, 1])
    fixed, kept = timestamp_validation(ds, policy="error", duplicate_policy="error")
    assert fixed.labels.tolist() == [0, 1]
    assert kept.tolist() == [0, 1]


# --- imputation ---------------------------------------------------------------

def test_impute_mean():
    ds = make_dataset([1.0, math.nan, 3.0])
    out = impute_missing(ds, strategy="mean")
    assert out.features["value"].tolist() == [1.0, 2.0, 3.0]


def test_impute_forward_fill_and_leading_gap():
    ds = make_dataset([math.nan, 5.0, math.nan, math.nan, 7.0])
    out = impute_missing(ds, strategy="forward_fill")
    assert out.features["value"].tolist() == [5.0, 5.0, 5.0, 5.0, 7.0]


def test_impute_linear_interior_and_flat_edges():
    ds = make_dataset([math.nan, 1.0, math.nan, 3.0, math.nan])
    out = impute_missing(ds, strategy="linear")
    assert out.features["value"].tolist() == [1.0, 1.0, 2.0, 3.0, 3.0]


def test_impute_all_missing_column():
    ds = make_dataset([math.nan, math.nan])
    with pytest.raises(AllMissingColumn):
        impute_missing(ds, strategy="mean")


def test_impute_no_missing_is_identity():
    ds = make_dataset([1.0, 2.0])
    assert impute_missing(ds).features["value"].tolist() == [1.0, 2.0]


# --- seasonal decomposition ---------------------------------------------------

def test_decomposition_trend_matches_oracle_even_and_odd():
    rng = np.random.default_rng(3)
    for period in (4, 7):
        x = rng.normal(size=60)
        trend, _, _ = seasonal_decomposition(x, period=period)
        oracle = centered_ma_oracle(x.tolist(), period)
        assert np.allclose(trend, oracle, equal_nan=True, atol=1e-12)


def test_decomposition_reconstruction_identity():
    rng = np.random.default_rng(11)
    x = rng.normal(size=120) + 3.0 * np.sin(np.arange(120) * 2 * np.pi / 12)
    trend, seasonal, residual = seasonal_decomposition(x, period=12)
    interior = ~np.isnan(trend)
    assert interior.sum() == 120 - 12  # half-period chopped from each end
    recon = trend + seasonal + residual
    assert np.allclose(recon[interior], x[interior], atol=1e-9)


def test_decomposition_seasonal_sums_to_zero():
    rng = np.random.default_rng(5)
    x = rng.normal(size=90)
    _, seasonal, _ = seasonal_decomposition(x, period=9)
    assert abs(seasonal[:9].sum()) < 1e-9
    assert np.allclose(seasonal[:9], seasonal[9:18])


def test_decomposition_pure_trend_has_zero_seasonal():
    x = np.arange(48, dtype=float)
    trend, seasonal, _ = seasonal_decomposition(x, period=6)
    # a straight line is its own centered average and has no seasonal part
    assert np.allclose(seasonal, 0.0, atol=1e-9)
    interior = ~np.isnan(trend)
    assert np.allclose(trend[interior], x[interior], atol=1e-9)


def test_decomposition_errors():
    with pytest.raises(NonPositivePeriod):
        seasonal_decomposition(np.arange(10.0), period=1)
    with pytest.raises(PeriodTooLarge):
        seasonal_decomposition(np.arange(10.0), period=6)
    with pytest.raises(ValueError):
        seasonal_decomposition(np.arange(20.0), period=4, model="multiplicative")


# --- moving average -----------------------------------------------------------

def test_moving_average_matches_oracle():
    rng = np.random.default_rng(1)
    x = rng.normal(size=40)
    for window in (1, 2, 3, 5, 8):
        assert np.allclose(moving_average(x, window),
                           truncated_ma_oracle(x.tolist(), window), atol=1e-12)


def test_moving_average_window_one_is_identity():
    x = np.array([3.0, 1.0, 4.0])
    assert moving_average(x, 1).tolist() == x.tolist()


def test_moving_average_edges_truncate():
    out = moving_average(np.array([0.0, 3.0, 6.0]), 3)
    assert out.tolist() == [1.5, 3.0, 4.5]


# --- differencing -------------------------------------------------------------

def test_difference_once_and_twice():
    x = np.array([1.0, 4.0, 9.0, 16.0])
    assert difference(x, 1).tolist() == [3.0, 5.0, 7.0]
    assert difference(x, 2).tolist() == [2.0, 2.0]


def test_difference_errors():
    with pytest.raises(OrderTooLarge):
        difference(np.array([1.0, 2.0]), order=2)
    with pytest.raises(ValueError):
        difference(np.array([1.0, 2.0]), order=0)


# --- standardization ----------------------------------------------------------

def test_standardize_uses_population_std():
    values = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]
    ds = make_dataset(values)
    t = standardize_fit(ds)
    assert t.means["value"] == statistics.fmean(values)
    assert t.stds["value"] == pytest.approx(statistics.pstdev(values), abs=1e-12)
    out = t.produce(ds)
    assert abs(out.features["value"].mean()) < 1e-12
    assert out.features["value"].std() == pytest.approx(1.0, abs=1e-12)


def test_standardize_constant_column_maps_to_zero():
    ds = make_dataset([5.0, 5.0, 5.0])
    out = standardize_fit(ds).produce(ds)
    assert out.features["value"].tolist() == [0.0, 0.0, 0.0]


def test_standardize_fit_on_row_subset():
    ds = make_dataset([0.0, 10.0, 1000.0, -1000.0])
    t = standardize_fit(ds, rows=np.array([0, 1]))
    assert t.means["value"] == 5.0
    assert t.fit_length == 2
    out = t.produce(ds)
    assert out.features["value"][0] == -1.0  # (0 - 5) / 5


# --- segmentation -------------------------------------------------------------

def test_segment_subsequences_shape_and_starts():
    x = np.arange(10.0)
    matrix, starts = segment_subsequences(x, window=4, stride=2)
    assert matrix.shape == (4, 4)
    assert starts.tolist() == [0, 2, 4, 6]
    assert matrix[1].tolist() == [2.0, 3.0, 4.0, 5.0]


def test_segment_full_window_single_row():
    matrix, starts = segment_subsequences(np.arange(5.0), window=5)
    assert matrix.shape == (1, 5)
    assert starts.tolist() == [0]


def test_segment_window_too_large():
    with pytest.raises(WindowTooLarge):
        segment_subsequences(np.arange(3.0), window=4)
