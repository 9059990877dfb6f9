"""
A tour of the detectors
=======================

Every detector turns a series (or a feature table built from it) into one
outlier score per row. Higher means more anomalous. This runs each one on
the same spiky series and reports where its top score lands.
"""

import numpy as np

from tods.benchmark import make_spike_benchmark
from tods.primitives.detection import (
    ar_residual_scores,
    iforest_fit,
    iforest_score,
    knn_scores,
    matrix_profile_discord,
    threshold_labels,
    zscore_scores,
)
from tods.primitives.processing import segment_subsequences

ds = make_spike_benchmark(n=600, period=30, n_anomalies=3, noise_sigma=0.3, seed=4)
x = ds.features["value"]
truth = np.flatnonzero(ds.labels).tolist()
print(f"planted anomalies at rows {truth}\n")


def report(name, scores, span=1, row_of=lambda i: i, against=None):
    """A detector 'hits' when its top-scored span covers a planted row."""
    start = row_of(int(np.nanargmax(scores)))
    covered = any(start <= t < start + span for t in against or truth)
    where = f"row {start}" if span == 1 else f"rows {start}..{start + span - 1}"
    print(f"{name:<16s} top score at {where:<14s} [{'HIT' if covered else 'miss'}]")


# z-score: distance from the series mean in standard deviations. Cheap and
# exactly right for point spikes like these.
report("zscore", zscore_scores(x))

# autoregression: predict each point from its recent past, score the miss.
report("ar_residual", ar_residual_scores(x, order=5))

# The next three work on sliding windows, so their unit of suspicion is a
# subsequence, not a point.
W = 8
windows, starts = segment_subsequences(x, window=W)
start_of = lambda i: int(starts[i])

# k-nearest neighbours: a window containing a spike is far from all others.
report("knn", knn_scores(windows, k=5), span=W, row_of=start_of)

# isolation forest: spiky windows isolate in very few random splits.
model = iforest_fit(windows, n_trees=100, subsample_size=64, seed=0)
report("iforest", iforest_score(model, windows), span=W, row_of=start_of)

# matrix profile: distance to the nearest non-overlapping subsequence after
# z-normalizing shapes. Its peak, the discord, is the pattern that repeats
# nowhere else. The window must be long enough to hold one full motif: at
# 8 points it sees only flat sine tops whose z-norm amplifies noise into
# random shapes, so the discord lands anywhere. At one full period the
# repeating cycle shape is the norm and a spiked cycle is the discord.
report("matrix_profile", matrix_profile_discord(x, window=W), span=W)
report("  (full period)", matrix_profile_discord(x, window=30), span=30)

# Scores become labels through a contamination quantile: keep the top 1%.
labels = threshold_labels(zscore_scores(x), contamination=0.01)
print(f"\nthreshold at 1% flags rows {np.flatnonzero(labels).tolist()}")
