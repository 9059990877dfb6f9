"""Synthetic benchmark: seasonal signal with planted spike anomalies.

The generator is its own oracle: spike positions are chosen first, labels
derive from them, and each spike replaces the local value with the seasonal
baseline plus an 8-sigma excursion, so the planted points are unambiguous
global outliers against unit-variance noise.
"""

from __future__ import annotations

import io

import numpy as np

from .dataset import TimeSeriesDataset


def make_spike_benchmark(
    n: int = 2000,
    period: int = 50,
    n_anomalies: int = 10,
    magnitude: float = 8.0,
    noise_sigma: float = 1.0,
    seed: int = 7,
) -> TimeSeriesDataset:
    """A labeled series: unit sine seasonality, Gaussian noise, spike outliers.

    Spikes land away from the edges with at least half a period between
    them; each is seasonal(t) +- magnitude * noise_sigma (sign seeded), the
    noise at that point replaced so the planted deviation is exact.
    """
    if n_anomalies < 1 or n < 4 * n_anomalies:
        raise ValueError(f"cannot plant {n_anomalies} anomalies in {n} points")
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    seasonal = np.sin(2 * np.pi * t / period)
    x = seasonal + rng.normal(0.0, noise_sigma, size=n)

    gap = max(period // 2, 2)
    margin = min(gap, (n - 1) // 2)
    positions: list[int] = []
    while len(positions) < n_anomalies:
        candidate = int(rng.integers(margin, n - margin))
        if all(abs(candidate - p) >= gap for p in positions):
            positions.append(candidate)
    signs = rng.choice([-1.0, 1.0], size=n_anomalies)

    labels = np.zeros(n, dtype=np.int64)
    for position, sign in zip(positions, signs):
        x[position] = seasonal[position] + sign * magnitude * noise_sigma
        labels[position] = 1

    return TimeSeriesDataset(
        timestamps=t,
        features={"value": x},
        labels=labels,
        name=f"spike-benchmark-{seed}",
    )


def dataset_to_csv(ds: TimeSeriesDataset) -> str:
    """Render a dataset as CSV (timestamp, features, label last when present)."""
    out = io.StringIO()
    columns = ["timestamp", *ds.feature_names]
    if ds.labels is not None:
        columns.append("label")
    out.write(",".join(columns) + "\n")
    for i in range(ds.n):
        cells = [str(int(ds.timestamps[i]))]
        cells += [repr(float(ds.features[c][i])) for c in ds.feature_names]
        if ds.labels is not None:
            cells.append(str(int(ds.labels[i])))
        out.write(",".join(cells) + "\n")
    return out.getvalue()
