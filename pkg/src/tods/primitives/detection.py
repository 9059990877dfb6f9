"""Detection-algorithm primitives and the rule-based reinforcement filter.

Point-wise detectors (z-score, isolation forest, k-nearest-neighbor
distance, autoregressive residual), the pattern-wise matrix-profile
discord, score-to-label thresholding, and post-hoc label rewriting from
human rules. All scores are oriented higher = more anomalous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dataset import TimeSeriesDataset
from ..errors import (
    ContaminationOutOfRange,
    KTooLarge,
    NonPositiveWindow,
    SeriesTooShort,
    SubsampleTooSmall,
    UnknownFeature,
    WindowTooLarge,
)
from .processing import STD_EPS, segment_subsequences

EULER_MASCHERONI = 0.5772156649
AR_RIDGE = 1e-8


def zscore_scores(x: np.ndarray) -> np.ndarray:
    """|x - mean| / std with mean and std over the non-NaN points.

    NaN inputs stay NaN; std is floored at 1e-12 so a constant series
    scores all zeros.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.isfinite(x).sum() < 2:
        raise SeriesTooShort("z-score needs at least 2 observed points")
    mu = np.nanmean(x)
    sigma = np.nanstd(x)
    return np.abs(x - mu) / max(sigma, STD_EPS)


# --- isolation forest -------------------------------------------------------

def _average_path_length(m: int) -> float:
    """c(m): expected unsuccessful-search path length in a BST of m points."""
    if m <= 1:
        return 0.0
    harmonic = math.log(m - 1) + EULER_MASCHERONI
    return 2.0 * harmonic - 2.0 * (m - 1) / m


@dataclass(frozen=True)
class _Leaf:
    size: int


@dataclass(frozen=True)
class _Split:
    feature: int
    value: float
    left: "_Leaf | _Split"
    right: "_Leaf | _Split"


def _build_tree(rows: np.ndarray, depth: int, limit: int, rng: np.random.Generator):
    m = len(rows)
    if m <= 1 or depth >= limit:
        return _Leaf(size=m)
    lows = rows.min(axis=0)
    highs = rows.max(axis=0)
    splittable = np.flatnonzero(highs > lows)
    if len(splittable) == 0:
        return _Leaf(size=m)  # all rows identical
    feature = int(rng.choice(splittable))
    lo = lows[feature]
    hi = highs[feature]
    value = float(rng.uniform(lo, hi))
    mask = rows[:, feature] < value
    return _Split(
        feature=feature,
        value=value,
        left=_build_tree(rows[mask], depth + 1, limit, rng),
        right=_build_tree(rows[~mask], depth + 1, limit, rng),
    )


def _collect_path_lengths(node, rows: np.ndarray, idx: np.ndarray, depth: int, out: np.ndarray):
    if isinstance(node, _Leaf):
        out[idx] = depth + _average_path_length(node.size)
        return
    mask = rows[idx, node.feature] < node.value
    _collect_path_lengths(node.left, rows, idx[mask], depth + 1, out)
    _collect_path_lengths(node.right, rows, idx[~mask], depth + 1, out)


@dataclass(frozen=True)
class IsolationForest:
    trees: list = field(repr=False)
    subsample_size: int
    n_features: int
    seed: int


def iforest_fit(rows: np.ndarray, n_trees: int = 100, subsample_size: int = 64,
                seed: int = 0) -> IsolationForest:
    """Fit an isolation forest on finite feature rows.

    Each tree grows on a seeded subsample (without replacement, capped at
    the row count) by random (feature, uniform split in [min, max])
    partitioning until isolation or the depth ceiling ceil(log2 psi).
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or len(rows) < 2:
        raise SeriesTooShort("isolation forest needs at least 2 rows")
    if subsample_size < 2:
        raise SubsampleTooSmall(f"subsample_size must be >= 2, got {subsample_size}")
    psi = min(subsample_size, len(rows))
    limit = math.ceil(math.log2(psi))
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        sample = rows[rng.choice(len(rows), size=psi, replace=False)]
        trees.append(_build_tree(sample, 0, limit, rng))
    return IsolationForest(trees=trees, subsample_size=psi,
                           n_features=rows.shape[1], seed=seed)


def iforest_score(model: IsolationForest, rows: np.ndarray) -> np.ndarray:
    """Anomaly score s(x) = 2^(-E[h(x)] / c(psi)), always in (0, 1)."""
    rows = np.asarray(rows, dtype=np.float64)
    total = np.zeros(len(rows))
    idx = np.arange(len(rows))
    depths = np.empty(len(rows))
    for tree in model.trees:
        _collect_path_lengths(tree, rows, idx, 0, depths)
        total += depths
    expected = total / len(model.trees)
    return 2.0 ** (-expected / _average_path_length(model.subsample_size))


# --- distance and prediction detectors --------------------------------------

def knn_scores(rows: np.ndarray, k: int = 5) -> np.ndarray:
    """Euclidean distance to the k-th nearest other row, brute force."""
    rows = np.asarray(rows, dtype=np.float64)
    m = len(rows)
    if not 1 <= k < m:
        raise KTooLarge(f"k must satisfy 1 <= k < {m}, got {k}")
    scores = np.empty(m)
    for i in range(m):
        d = np.linalg.norm(rows - rows[i], axis=1)
        d[i] = np.inf
        scores[i] = np.partition(d, k - 1)[k - 1]
    return scores


def ar_fit(x: np.ndarray, order: int) -> np.ndarray:
    """AR(order) coefficients [intercept, a_1..a_p] by least squares.

    Normal equations with an always-on ridge 1e-8 so a singular design
    (constant series, exact collinearity) still solves deterministically.
    """
    x = np.asarray(x, dtype=np.float64)
    p = order
    if len(x) < p + 1:
        raise SeriesTooShort(f"AR({p}) needs more than {p} training points")
    design = np.column_stack(
        [np.ones(len(x) - p)] + [x[p - j:len(x) - j] for j in range(1, p + 1)]
    )
    target = x[p:]
    ok = np.isfinite(design).all(axis=1) & np.isfinite(target)
    design, target = design[ok], target[ok]
    if len(target) == 0:
        raise SeriesTooShort(f"AR({p}) has no usable training rows")
    gram = design.T @ design + AR_RIDGE * np.eye(p + 1)
    return np.linalg.solve(gram, design.T @ target)


def ar_predict(x: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """One-step-ahead predictions; NaN for t < order."""
    x = np.asarray(x, dtype=np.float64)
    p = len(coef) - 1
    pred = np.full(len(x), np.nan)
    if len(x) > p:
        lags = np.column_stack([x[p - j:len(x) - j] for j in range(1, p + 1)])
        pred[p:] = coef[0] + lags @ coef[1:]
    return pred


def ar_residual_scores(x: np.ndarray, order: int = 3, train_fraction: float = 1.0) -> np.ndarray:
    """|x_t - prediction| from an AR model fit on the leading fraction."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if not 0 < train_fraction <= 1:
        raise ValueError(f"train_fraction must be in (0, 1], got {train_fraction}")
    if n < 3 * order:
        raise SeriesTooShort(f"AR({order}) scoring needs n >= {3 * order}, got {n}")
    n_train = math.ceil(train_fraction * n)
    coef = ar_fit(x[:n_train], order)
    return np.abs(x - ar_predict(x, coef))


def matrix_profile_discord(x: np.ndarray, window: int) -> np.ndarray:
    """Per-start distance to the nearest non-overlapping subsequence.

    Distances are z-normalized Euclidean; neighbors closer than one window
    (|i - j| < window) are trivial matches and excluded; starts with no
    admissible neighbor score NaN. The discord is the argmax. Brute force
    O(n^2 w): every pair is formed explicitly.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if window < 1:
        raise NonPositiveWindow(f"window must be >= 1, got {window}")
    if n < 2 * window:
        raise WindowTooLarge(f"need n >= 2*window, got n={n}, window={window}")
    matrix, _ = segment_subsequences(x, window)
    mu = matrix.mean(axis=1, keepdims=True)
    sigma = matrix.std(axis=1, keepdims=True)
    znorm = (matrix - mu) / np.maximum(sigma, STD_EPS)
    m = len(matrix)
    scores = np.full(m, np.nan)
    offsets = np.arange(m)
    for i in range(m):
        admissible = np.abs(offsets - i) >= window
        if not admissible.any():
            continue
        d = np.sqrt(((znorm[admissible] - znorm[i]) ** 2).sum(axis=1))
        scores[i] = d.min()
    return scores


# --- labels -----------------------------------------------------------------

def threshold_labels(scores: np.ndarray, contamination: float) -> np.ndarray:
    """Label the ceil(contamination * m) highest of m non-NaN scores as 1.

    Ties break toward the lower index; NaN scores always label 0. The
    ceiling is taken with a 1e-9 nudge so float noise in the product cannot
    shift the count.
    """
    if not 0 <= contamination <= 1:
        raise ContaminationOutOfRange(f"contamination must be in [0, 1], got {contamination}")
    scores = np.asarray(scores, dtype=np.float64)
    finite = np.flatnonzero(~np.isnan(scores))
    quota = math.ceil(contamination * len(finite) - 1e-9)
    quota = max(0, min(quota, len(finite)))
    labels = np.zeros(len(scores), dtype=np.int64)
    if quota:
        # stable sort on negated scores keeps lower indices first within ties
        top = finite[np.argsort(-scores[finite], kind="stable")[:quota]]
        labels[top] = 1
    return labels


# --- reinforcement ----------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """One human correction: where the predicate holds, force the label.

    predicate is one of in_range / outside_range (against a feature column
    or the running prediction) and time_in (against timestamps); action is
    force_normal or force_outlier.
    """

    predicate: str
    action: str
    feature: str = "prediction"
    lo: float = 0.0
    hi: float = 0.0

    def __post_init__(self):
        if self.predicate not in ("in_range", "outside_range", "time_in"):
            raise ValueError(f"unknown predicate {self.predicate!r}")
        if self.action not in ("force_normal", "force_outlier"):
            raise ValueError(f"unknown action {self.action!r}")
        if self.lo > self.hi:
            raise ValueError(f"rule bounds disagree: lo={self.lo} > hi={self.hi}")


def rule_based_filter(labels: np.ndarray, ds: TimeSeriesDataset,
                      rules: list[Rule]) -> np.ndarray:
    """Apply rules in order, overwriting labels where predicates match.

    Later rules win conflicts. The special feature name "prediction"
    targets the running label vector, so earlier rules feed later ones.
    """
    out = np.asarray(labels, dtype=np.int64).copy()
    if len(out) != ds.n:
        raise ValueError(f"labels length {len(out)} != dataset length {ds.n}")
    for rule in rules:
        if rule.predicate == "time_in":
            values = ds.timestamps.astype(np.float64)
        elif rule.feature == "prediction":
            values = out.astype(np.float64)
        elif rule.feature in ds.features:
            values = ds.features[rule.feature]
        else:
            raise UnknownFeature(f"rule references unknown feature {rule.feature!r}")
        inside = (values >= rule.lo) & (values <= rule.hi)
        match = ~inside if rule.predicate == "outside_range" else inside
        out[match] = 1 if rule.action == "force_outlier" else 0
    return out
