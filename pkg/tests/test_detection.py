import math
import statistics

import numpy as np
import pytest

from tods.errors import (
    ContaminationOutOfRange,
    KTooLarge,
    SeriesTooShort,
    SubsampleTooSmall,
    UnknownFeature,
    WindowTooLarge,
)
from tods.primitives.detection import (
    EULER_MASCHERONI,
    IsolationForest,
    Rule,
    _average_path_length,
    _Leaf,
    ar_fit,
    ar_predict,
    ar_residual_scores,
    iforest_fit,
    iforest_score,
    knn_scores,
    matrix_profile_discord,
    rule_based_filter,
    threshold_labels,
    zscore_scores,
)

from conftest import make_dataset


# --- independent oracles -----------------------------------------------------
# Pure-python, loop-by-loop references with their own operation order.

def knn_oracle(points, k):
    """k-th nearest distance per point via full sorted distance lists."""
    out = []
    for i, a in enumerate(points):
        dists = sorted(
            math.dist(a, b) for j, b in enumerate(points) if j != i
        )
        out.append(dists[k - 1])
    return out


def znorm(xs):
    mean = statistics.fmean(xs)
    std = statistics.pstdev(xs)
    if std <= 1e-12:
        return [0.0] * len(xs)
    return [(v - mean) / std for v in xs]


def matrix_profile_oracle(xs, w):
    """Explicit double loop over all admissible subsequence pairs."""
    n = len(xs)
    windows = [znorm(xs[i:i + w]) for i in range(n - w + 1)]
    profile = []
    for i, a in enumerate(windows):
        best = math.inf
        for j, b in enumerate(windows):
            if abs(i - j) < w:
                continue
            best = min(best, math.dist(a, b))
        profile.append(best if best < math.inf else math.nan)
    return profile


# --- z-score ------------------------------------------------------------------

def test_zscore_golden():
    s = zscore_scores(np.array([0.0, 0.0, 0.0, 4.0]))
    # mean 1, population std sqrt(3)
    assert s[3] == pytest.approx(3.0 / math.sqrt(3.0), abs=1e-12)


def test_zscore_constant_series():
    assert zscore_scores(np.full(5, 2.0)).tolist() == [0.0] * 5


def test_zscore_keeps_nan():
    s = zscore_scores(np.array([1.0, np.nan, 3.0]))
    assert math.isnan(s[1]) and not math.isnan(s[0])


def test_zscore_too_short():
    with pytest.raises(SeriesTooShort):
        zscore_scores(np.array([1.0, np.nan]))


# --- isolation forest ---------------------------------------------------------

def test_average_path_length_golden():
    assert _average_path_length(2) == pytest.approx(0.1544313298, abs=1e-9)
    assert _average_path_length(1) == 0.0
    assert _average_path_length(0) == 0.0


def test_average_path_length_formula():
    for m in (3, 10, 64, 256):
        expected = 2 * (math.log(m - 1) + EULER_MASCHERONI) - 2 * (m - 1) / m
        assert _average_path_length(m) == pytest.approx(expected, abs=1e-12)


def test_iforest_scores_are_probabilities():
    rng = np.random.default_rng(0)
    rows = rng.normal(size=(200, 3))
    model = iforest_fit(rows, n_trees=50, subsample_size=64, seed=0)
    s = iforest_score(model, rows)
    assert ((s > 0) & (s < 1)).all()


def test_iforest_score_half_identity():
    # a forest of bare leaves gives every point path length c(psi) exactly,
    # so s = 2^(-c/c) must be 0.5
    model = IsolationForest(trees=[_Leaf(size=64)], subsample_size=64,
                            n_features=2, seed=0)
    s = iforest_score(model, np.zeros((5, 2)))
    assert np.allclose(s, 0.5, atol=1e-12)


def test_iforest_planted_outlier_is_argmax():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        rows = rng.normal(size=(100, 2))
        rows[17] = [10.0, 10.0]  # 10 sigma out
        model = iforest_fit(rows, n_trees=100, subsample_size=64, seed=seed)
        hits += int(np.argmax(iforest_score(model, rows)) == 17)
    assert hits >= 95


def test_iforest_is_seed_deterministic():
    rows = np.random.default_rng(3).normal(size=(80, 2))
    a = iforest_score(iforest_fit(rows, n_trees=20, seed=9), rows)
    b = iforest_score(iforest_fit(rows, n_trees=20, seed=9), rows)
    assert np.array_equal(a, b)
    c = iforest_score(iforest_fit(rows, n_trees=20, seed=10), rows)
    assert not np.array_equal(a, c)


def test_iforest_input_checks():
    with pytest.raises(SeriesTooShort):
        iforest_fit(np.zeros((1, 2)))
    with pytest.raises(SubsampleTooSmall):
        iforest_fit(np.zeros((10, 2)), subsample_size=1)


def test_iforest_subsample_capped_at_row_count():
    rows = np.random.default_rng(1).normal(size=(10, 2))
    model = iforest_fit(rows, n_trees=5, subsample_size=256, seed=0)
    assert model.subsample_size == 10


# --- knn ----------------------------------------------------------------------

def test_knn_golden_three_points():
    rows = np.array([[0.0], [0.1], [10.0]])
    assert np.allclose(knn_scores(rows, k=1), [0.1, 0.1, 9.9], atol=1e-12)


def test_knn_matches_oracle():
    rng = np.random.default_rng(8)
    for _ in range(10):
        m = int(rng.integers(5, 40))
        rows = rng.normal(size=(m, int(rng.integers(1, 4))))
        k = int(rng.integers(1, m))
        assert np.allclose(knn_scores(rows, k),
                           knn_oracle(rows.tolist(), k), atol=1e-9)


def test_knn_k_bounds():
    rows = np.zeros((4, 1))
    with pytest.raises(KTooLarge):
        knn_scores(rows, k=4)
    with pytest.raises(KTooLarge):
        knn_scores(rows, k=0)


# --- AR residuals -------------------------------------------------------------

def test_ar_fit_recovers_exact_recurrence():
    # x_t = 2 + 0.5 x_{t-1}: a noiseless AR(1)
    x = np.empty(50)
    x[0] = 1.0
    for t in range(1, 50):
        x[t] = 2.0 + 0.5 * x[t - 1]
    coef = ar_fit(x, order=1)
    assert coef[0] == pytest.approx(2.0, abs=1e-4)
    assert coef[1] == pytest.approx(0.5, abs=1e-4)


def test_ar_fit_matches_lstsq_oracle():
    rng = np.random.default_rng(15)
    x = rng.normal(size=80).cumsum()
    p = 3
    coef = ar_fit(x, order=p)
    design = np.column_stack(
        [np.ones(len(x) - p)] + [x[p - j:len(x) - j] for j in range(1, p + 1)])
    oracle, *_ = np.linalg.lstsq(design, x[p:], rcond=None)
    assert np.allclose(coef, oracle, atol=1e-5)


def test_ar_predict_nan_head():
    pred = ar_predict(np.arange(10.0), np.array([0.0, 1.0, 0.0]))
    assert np.isnan(pred[:2]).all()
    assert not np.isnan(pred[2:]).any()


def test_ar_residual_scores_flag_a_break():
    x = np.sin(np.arange(100) * 0.3)
    x[60] += 5.0
    s = ar_residual_scores(x, order=3)
    assert np.isnan(s[:3]).all()
    assert int(np.nanargmax(s)) == 60


def test_ar_residual_train_fraction():
    x = np.sin(np.arange(100) * 0.3)
    x[90] += 50.0  # corruption outside the training window
    s = ar_residual_scores(x, order=2, train_fraction=0.8)
    # the spike and its one-step echo dominate (the AR(2) sine has |a1| > 1)
    assert int(np.nanargmax(s)) in (90, 91)
    assert s[90] > 10.0


def test_ar_residual_too_short():
    with pytest.raises(SeriesTooShort):
        ar_residual_scores(np.arange(8.0), order=3)
    with pytest.raises(ValueError):
        ar_residual_scores(np.arange(30.0), order=3, train_fraction=0.0)


def test_ar_constant_series_is_solvable():
    s = ar_residual_scores(np.full(30, 7.0), order=2)
    assert np.nanmax(s) < 1e-5  # ridge keeps the fit stable


# --- matrix profile -----------------------------------------------------------

def test_matrix_profile_matches_oracle():
    rng = np.random.default_rng(23)
    for _ in range(8):
        n = int(rng.integers(20, 60))
        w = int(rng.integers(3, max(4, n // 4)))
        x = rng.normal(size=n)
        assert np.allclose(matrix_profile_discord(x, w),
                           matrix_profile_oracle(x.tolist(), w),
                           atol=1e-9, equal_nan=True)


def test_matrix_profile_minimal_two_windows():
    # n = 2w leaves exactly two admissible starts, mutual neighbors
    x = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
    profile = matrix_profile_discord(x[:4], window=2)
    assert not math.isnan(profile[0]) and not math.isnan(profile[2])
    assert math.isnan(profile[1])
    assert profile[0] == profile[2]


def test_matrix_profile_discord_location():
    x = np.tile([0.0, 1.0, 0.0, -1.0], 12).astype(float)
    x[24:28] = [4.0, -4.0, 4.0, -4.0]  # one inverted, inflated cycle
    profile = matrix_profile_discord(x, window=4)
    assert 21 <= int(np.nanargmax(profile)) <= 27


def test_matrix_profile_window_too_large():
    with pytest.raises(WindowTooLarge):
        matrix_profile_discord(np.arange(10.0), window=6)  # needs n >= 2w


# --- threshold ----------------------------------------------------------------

def threshold_oracle(scores, contamination):
    ranked = sorted(
        (i for i, s in enumerate(scores) if not math.isnan(s)),
        key=lambda i: (-scores[i], i),
    )
    quota = math.ceil(contamination * len(ranked) - 1e-9)
    chosen = set(ranked[:max(0, quota)])
    return [1 if i in chosen else 0 for i in range(len(scores))]


def test_threshold_golden():
    labels = threshold_labels(np.array([0.1, 0.9, 0.2]), 1 / 3)
    assert labels.tolist() == [0, 1, 0]


def test_threshold_matches_oracle():
    rng = np.random.default_rng(31)
    for _ in range(20):
        scores = rng.normal(size=50)
        scores[rng.integers(0, 50, size=5)] = np.nan
        c = float(rng.uniform(0, 1))
        assert threshold_labels(scores, c).tolist() == threshold_oracle(scores.tolist(), c)


def test_threshold_extremes():
    scores = np.array([1.0, 2.0, np.nan])
    assert threshold_labels(scores, 0.0).tolist() == [0, 0, 0]
    assert threshold_labels(scores, 1.0).tolist() == [1, 1, 0]


def test_threshold_ties_go_to_lower_index():
    labels = threshold_labels(np.array([5.0, 5.0, 5.0, 1.0]), 0.5)
    assert labels.tolist() == [1, 1, 0, 0]


def test_threshold_ceil_count():
    # 0.01 of 150 points = 1.5 -> 2 labeled
    scores = np.arange(150.0)
    assert threshold_labels(scores, 0.01).sum() == 2


def test_threshold_contamination_range():
    with pytest.raises(ContaminationOutOfRange):
        threshold_labels(np.arange(3.0), 1.1)


# --- rule-based filter --------------------------------------------------------

def test_rules_force_actions_and_order():
    ds = make_dataset([1.0, 5.0, 9.0])
    labels = np.array([1, 1, 1])
    out = rule_based_filter(labels, ds, [
        Rule(predicate="in_range", action="force_normal", feature="value", lo=0.0, hi=6.0),
        Rule(predicate="in_range", action="force_outlier", feature="value", lo=4.0, hi=6.0),
    ])
    # the second rule overwrites the first on the middle point
    assert out.tolist() == [0, 1, 1]


def test_rules_outside_range():
    ds = make_dataset([-5.0, 0.0, 5.0])
    out = rule_based_filter(np.zeros(3, dtype=int), ds, [
        Rule(predicate="outside_range", action="force_outlier",
             feature="value", lo=-1.0, hi=1.0),
    ])
    assert out.tolist() == [1, 0, 1]


def test_rules_time_in_targets_timestamps():
    ds = make_dataset([1.0, 1.0, 1.0, 1.0])
    out = rule_based_filter(np.ones(4, dtype=int), ds, [
        Rule(predicate="time_in", action="force_normal", lo=1.0, hi=2.0),
    ])
    assert out.tolist() == [1, 0, 0, 1]


def test_rules_prediction_feature_reads_running_labels():
    ds = make_dataset([0.0, 0.0, 0.0])
    out = rule_based_filter(np.array([0, 1, 0]), ds, [
        Rule(predicate="in_range", action="force_outlier",
             feature="prediction", lo=1.0, hi=1.0),
        Rule(predicate="in_range", action="force_normal",
             feature="prediction", lo=0.0, hi=0.0),
    ])
    # second rule sees the labels as updated by the first
    assert out.tolist() == [0, 1, 0]


def test_rules_are_idempotent():
    ds = make_dataset([1.0, 5.0, 9.0])
    rules = [Rule(predicate="outside_range", action="force_outlier",
                  feature="value", lo=0.0, hi=6.0)]
    once = rule_based_filter(np.zeros(3, dtype=int), ds, rules)
    twice = rule_based_filter(once, ds, rules)
    assert once.tolist() == twice.tolist()


def test_rules_unknown_feature():
    ds = make_dataset([1.0])
    with pytest.raises(UnknownFeature):
        rule_based_filter(np.zeros(1, dtype=int), ds, [
            Rule(predicate="in_range", action="force_normal",
                 feature="nope", lo=0.0, hi=1.0),
        ])


def test_rule_validation():
    with pytest.raises(ValueError):
        Rule(predicate="near", action="force_normal")
    with pytest.raises(ValueError):
        Rule(predicate="in_range", action="force_normal", lo=2.0, hi=1.0)
