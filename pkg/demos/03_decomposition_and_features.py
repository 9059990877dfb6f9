"""
Decomposition and feature extraction
====================================

Processing primitives reshape a raw series before any detector sees it.
"""

import numpy as np

from tods.primitives.features import (
    autocorrelation,
    dft_magnitudes,
    nmf_fit,
    nmf_residual_features,
    window_statistics,
)
from tods.primitives.processing import seasonal_decomposition

rng = np.random.default_rng(8)
n, period = 240, 12
t = np.arange(n)
x = 0.02 * t + 2.0 * np.sin(2 * np.pi * t / period) + rng.normal(0.0, 0.3, n)
x[100] += 5.0  # one planted spike

# Classical decomposition: trend is a centered moving average over one
# period, seasonal is the per-phase mean of the detrended series, residual
# is what neither explains. The spike survives only in the residual.
trend, seasonal, residual = seasonal_decomposition(x, period=period)
print(f"residual argmax at t={int(np.nanargmax(np.abs(residual)))} (spike was at 100)")
interior = np.isfinite(trend)
gap = np.abs(x - (trend + seasonal + residual))[interior]
print(f"reconstruction gap on the interior: {gap.max():.2e}")

# The autocorrelation function exposes the period without being told it:
# the first peak past lag zero sits at the seasonal lag.
r = autocorrelation(x, max_lag=30)
print(f"acf peak after lag 0 at lag {int(np.argmax(r[2:]) + 2)} (true period {period})")

# Window statistics summarize each sliding window by its moments.
table = window_statistics(x, window=period, stride=1)
print(f"window stats: {table.rows.shape[1]} features x {table.rows.shape[0]} windows")

# DFT magnitudes per window: the seasonal tone concentrates in one bin.
# Columns are k = 1..n_bins (DC excluded), so column j holds bin j+1.
spectra = dft_magnitudes(x, window=2 * period, stride=period, n_bins=8)
strongest = int(np.argmax(spectra.rows.mean(axis=0))) + 1
print(f"strongest bin: k={strongest} (expect 2: two cycles per window)")

# NMF compresses the window matrix to a low rank; rows it reconstructs
# badly do not look like the recurring motifs, which is itself a signal.
V = np.abs(np.stack([x[s:s + period] for s in range(0, n - period, period)]))
W, H, trace = nmf_fit(V, rank=2, max_iter=300, seed=0)
print(f"nmf objective fell {trace[0]:.1f} -> {trace[-1]:.1f} over {len(trace)} iters")
resid = nmf_residual_features(V, W, H)
print(f"worst reconstructed window starts at t={int(np.argmax(resid)) * period}")
