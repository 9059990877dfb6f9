"""Feature-analysis primitives.

Per-window feature extraction (moment statistics, DFT magnitudes,
autocorrelation) and nonnegative matrix factorization with per-row
reconstruction error, all consumed by the detection family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LagTooLarge, NegativeEntry, RankTooLarge, TooManyBins
from .processing import segment_subsequences

NMF_EPS = 1e-12


@dataclass(frozen=True)
class FeatureTable:
    """Feature rows plus the original index each row derives from."""

    rows: np.ndarray
    row_index_map: np.ndarray
    column_names: list[str]

    def __post_init__(self):
        rim = np.asarray(self.row_index_map)
        if len(rim) > 1 and np.any(np.diff(rim) <= 0):
            raise ValueError("row_index_map must be strictly increasing")
        if self.rows.ndim != 2 or self.rows.shape[0] != len(rim):
            raise ValueError("rows and row_index_map disagree on row count")
        if self.rows.shape[1] != len(self.column_names):
            raise ValueError("column_names and rows disagree on column count")
        if self.rows.shape[0] and np.isnan(self.rows).all(axis=0).any():
            raise ValueError("a feature column is entirely NaN")


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased-estimator autocorrelation r[0..max_lag].

    r[k] = sum (x_t - mean)(x_{t+k} - mean) / sum (x_t - mean)^2, so r[0] is
    exactly 1. A zero-variance series returns r[0]=1 and 0 at every positive
    lag by convention.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ValueError(f"autocorrelation needs n >= 2, got {n}")
    if max_lag < 0 or max_lag >= n:
        raise LagTooLarge(f"max_lag must satisfy 0 <= max_lag < {n}, got {max_lag}")
    centered = x - x.mean()
    denom = float(centered @ centered)
    r = np.zeros(max_lag + 1)
    r[0] = 1.0
    if denom == 0.0:
        return r
    for k in range(1, max_lag + 1):
        r[k] = float(centered[:n - k] @ centered[k:]) / denom
    return r


def _moments(rows: np.ndarray):
    """Population moment statistics per row of a windows matrix."""
    mean = rows.mean(axis=1)
    centered = rows - mean[:, None]
    m2 = (centered**2).mean(axis=1)
    m3 = (centered**3).mean(axis=1)
    m4 = (centered**4).mean(axis=1)
    std = np.sqrt(m2)
    nonzero = m2 > 0
    skew = np.zeros(len(rows))
    kurt = np.zeros(len(rows))
    skew[nonzero] = m3[nonzero] / m2[nonzero] ** 1.5
    kurt[nonzero] = m4[nonzero] / m2[nonzero] ** 2 - 3.0
    return mean, std, skew, kurt


def window_statistics(x: np.ndarray, window: int, stride: int = 1) -> FeatureTable:
    """Moment statistics per sliding window: mean, std, min, max, skewness,
    excess kurtosis (skewness and kurtosis are 0 for zero-variance windows).
    """
    matrix, starts = segment_subsequences(x, window, stride)
    mean, std, skew, kurt = _moments(matrix)
    rows = np.column_stack([mean, std, matrix.min(axis=1), matrix.max(axis=1), skew, kurt])
    return FeatureTable(
        rows=rows,
        row_index_map=starts,
        column_names=["mean", "std", "min", "max", "skewness", "kurtosis"],
    )


def dft_magnitudes(x: np.ndarray, window: int, stride: int, n_bins: int) -> FeatureTable:
    """Per-window DFT magnitudes |X_k| for k = 1..n_bins (DC excluded).

    Direct O(w^2) summation; windows are small at this scale.
    """
    if n_bins < 1 or n_bins > window // 2:
        raise TooManyBins(f"n_bins must satisfy 1 <= n_bins <= window//2 = {window // 2}")
    matrix, starts = segment_subsequences(x, window, stride)
    t = np.arange(window)
    rows = np.empty((len(starts), n_bins))
    for j, k in enumerate(range(1, n_bins + 1)):
        basis = np.exp(-2j * np.pi * k * t / window)
        rows[:, j] = np.abs(matrix @ basis)
    return FeatureTable(
        rows=rows,
        row_index_map=starts,
        column_names=[f"dft_{k}" for k in range(1, n_bins + 1)],
    )


# --- nonnegative matrix factorization ---------------------------------------

def nmf_fit(V: np.ndarray, rank: int, max_iter: int = 200, tol: float = 1e-6, seed: int = 0):
    """Factor a nonnegative matrix V ~ W @ H by multiplicative updates.

    Minimizes the squared Frobenius reconstruction error with the classical
    alternating updates (H then W, denominators floored at 1e-12). Factors
    start from a seeded uniform(0, 1] draw, so runs are reproducible.
    Iteration stops at max_iter or when the relative objective improvement
    falls below tol.

    Returns (W, H, error_trace) with the objective recorded after every
    iteration.
    """
    V = np.asarray(V, dtype=np.float64)
    if not np.isfinite(V).all() or (V < 0).any():
        raise NegativeEntry("NMF input must be nonnegative and finite")
    m, n = V.shape
    if not 1 <= rank <= min(m, n):
        raise RankTooLarge(f"rank must satisfy 1 <= rank <= {min(m, n)}, got {rank}")

    rng = np.random.default_rng(seed)
    W = 1.0 - rng.random((m, rank))  # uniform (0, 1], never zero
    H = 1.0 - rng.random((rank, n))

    error_trace = []
    previous = None
    for _ in range(max_iter):
        H *= (W.T @ V) / (W.T @ W @ H + NMF_EPS)
        W *= (V @ H.T) / (W @ H @ H.T + NMF_EPS)
        objective = float(((V - W @ H) ** 2).sum())
        error_trace.append(objective)
        if previous is not None:
            improvement = (previous - objective) / max(previous, NMF_EPS)
            if improvement < tol:
                break
        previous = objective
    return W, H, np.array(error_trace)


def nmf_residual_features(V: np.ndarray, W: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Per-row Euclidean reconstruction error ||V_i - (W@H)_i||."""
    return np.linalg.norm(V - W @ H, axis=1)
