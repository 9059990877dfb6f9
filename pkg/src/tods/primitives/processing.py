"""Data-processing and time-series-processing primitives.

Table repair (timestamp validation, imputation) and signal transforms
(decomposition, smoothing, differencing, standardization, subsequence
segmentation) that run before feature extraction. Every transform's
output length is a pure function of the input length and its
hyperparameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import TimeSeriesDataset
from ..errors import (
    AllMissingColumn,
    DuplicateTimestamp,
    NonPositivePeriod,
    NonPositiveWindow,
    OrderTooLarge,
    PeriodTooLarge,
    UnsortedTimestamps,
    WindowTooLarge,
)

STD_EPS = 1e-12


# --- table repair -----------------------------------------------------------

def timestamp_validation(
    ds: TimeSeriesDataset,
    policy: str = "sort",
    duplicate_policy: str = "keep_first",
):
    """Enforce strictly increasing timestamps.

    Out-of-order rows are stably sorted (policy="sort") or rejected
    (policy="error"); duplicate timestamps collapse to their first
    occurrence (duplicate_policy="keep_first") or are rejected.

    Returns (dataset, kept_rows) where kept_rows maps the output rows to
    input row positions.
    """
    ts = ds.timestamps
    order = np.arange(ds.n)
    if np.any(np.diff(ts) < 0):
        if policy == "error":
            raise UnsortedTimestamps("timestamps are not sorted")
        order = np.argsort(ts, kind="stable")
        ts = ts[order]
    if np.any(np.diff(ts) == 0):
        if duplicate_policy == "error":
            dup = int(ts[np.flatnonzero(np.diff(ts) == 0)[0]])
            raise DuplicateTimestamp(f"timestamp {dup} occurs more than once")
        keep = np.concatenate(([True], np.diff(ts) > 0))
        order = order[keep]
        ts = ts[keep]
    out = TimeSeriesDataset(
        timestamps=ts,
        features={c: v[order] for c, v in ds.features.items()},
        labels=None if ds.labels is None else ds.labels[order],
        name=ds.name,
    )
    return out, order


def _impute_column(x: np.ndarray, strategy: str, column: str) -> np.ndarray:
    missing = np.isnan(x)
    if not missing.any():
        return x
    if missing.all():
        raise AllMissingColumn(f"column {column!r} has no observed value")
    observed = np.flatnonzero(~missing)
    y = x.copy()
    if strategy == "mean":
        y[missing] = x[observed].mean()
    elif strategy == "forward_fill":
        # leading gap back-filled from the first observed value
        idx = np.maximum.accumulate(np.where(~missing, np.arange(len(x)), -1))
        idx[idx < 0] = observed[0]
        y = x[idx]
    elif strategy == "linear":
        y[missing] = np.interp(np.flatnonzero(missing), observed, x[observed])
    else:
        raise ValueError(f"unknown imputation strategy {strategy!r}")
    return y


def impute_missing(ds: TimeSeriesDataset, strategy: str = "linear") -> TimeSeriesDataset:
    """Fill NaN cells; mean, forward-fill, or linear interpolation.

    Boundary gaps are held flat (linear) or back-filled from the first
    observed value (forward_fill).
    """
    features = {c: _impute_column(v, strategy, c) for c, v in ds.features.items()}
    return ds.replace(features=features)


# --- signal transforms ------------------------------------------------------

def seasonal_decomposition(x: np.ndarray, period: int, model: str = "additive"):
    """Classical additive decomposition into (trend, seasonal, residual).

    Trend is the centered moving average over one period (two straddling
    windows averaged when the period is even), so it is NaN over the first
    and last period//2 indices. Seasonal is the per-phase mean of x - trend,
    re-centered to sum to zero over one period and tiled to full length.
    Residual is x - trend - seasonal where the trend exists.
    """
    if model != "additive":
        raise ValueError(f"unknown decomposition model {model!r}")
    if period < 2:
        raise NonPositivePeriod(f"period must be >= 2, got {period}")
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 2 * period:
        raise PeriodTooLarge(f"need n >= 2*period, got n={n}, period={period}")

    half = period // 2
    trend = np.full(n, np.nan)
    if period % 2 == 1:
        kernel = np.full(period, 1.0 / period)
    else:
        # average of the two windows straddling t: half weight at the ends
        kernel = np.full(period + 1, 1.0 / period)
        kernel[0] = kernel[-1] = 0.5 / period
    trend[half:n - half] = np.convolve(x, kernel, mode="valid")

    detrended = x - trend
    seasonal_means = np.empty(period)
    for phase in range(period):
        vals = detrended[phase::period]
        seasonal_means[phase] = np.nanmean(vals)
    seasonal_means -= seasonal_means.mean()
    seasonal = np.tile(seasonal_means, n // period + 1)[:n]

    residual = x - trend - seasonal
    return trend, seasonal, residual


def moving_average(x: np.ndarray, window: int, mode: str = "centered_truncated") -> np.ndarray:
    """Centered moving mean with edge truncation; output length equals input."""
    if mode != "centered_truncated":
        raise ValueError(f"unknown moving-average mode {mode!r}")
    if window < 1:
        raise NonPositiveWindow(f"window must be >= 1, got {window}")
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    half = window // 2
    out = np.empty(n)
    for t in range(n):
        lo = max(0, t - half)
        hi = min(n - 1, t + half)
        out[t] = x[lo:hi + 1].mean()
    return out


def difference(x: np.ndarray, order: int = 1) -> np.ndarray:
    """First differences applied ``order`` times; output length n - order."""
    x = np.asarray(x, dtype=np.float64)
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if len(x) <= order:
        raise OrderTooLarge(f"order {order} needs more than {order} points, got {len(x)}")
    return np.diff(x, n=order)


@dataclass(frozen=True)
class StandardizeTransform:
    """Per-column (x - mean) / std frozen at fit time; std floored at 1e-12."""

    means: dict[str, float]
    stds: dict[str, float]
    fit_length: int

    def produce(self, ds: TimeSeriesDataset) -> TimeSeriesDataset:
        features = {}
        for c, v in ds.features.items():
            mu = self.means.get(c, 0.0)
            sd = self.stds.get(c, 1.0)
            features[c] = (v - mu) / max(sd, STD_EPS)
        return ds.replace(features=features)


def standardize_fit(ds: TimeSeriesDataset, rows: np.ndarray | None = None) -> StandardizeTransform:
    """Learn per-column mean and population std, optionally from a row subset."""
    means, stds = {}, {}
    for c, v in ds.features.items():
        sample = v if rows is None else v[rows]
        means[c] = float(np.nanmean(sample))
        stds[c] = float(np.nanstd(sample))
    n_fit = ds.n if rows is None else len(rows)
    return StandardizeTransform(means=means, stds=stds, fit_length=n_fit)


def segment_subsequences(x: np.ndarray, window: int, stride: int = 1):
    """Sliding subsequences as a (num_windows, window) matrix.

    Returns (matrix, starts) where starts[i] is the original index of row
    i's first element.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if window < 1:
        raise NonPositiveWindow(f"window must be >= 1, got {window}")
    if stride < 1:
        raise NonPositiveWindow(f"stride must be >= 1, got {stride}")
    if window > n:
        raise WindowTooLarge(f"window {window} exceeds series length {n}")
    starts = np.arange(0, n - window + 1, stride)
    matrix = np.stack([x[s:s + window] for s in starts])
    return matrix, starts
