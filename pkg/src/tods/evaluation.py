"""Train/test splitting and prediction scoring.

Splits never shuffle: k-fold test sets are contiguous time-ordered blocks
and holdout trains on the leading fraction, because shuffled folds leak
temporal context. Evaluation fits on train indices, produces over the full
series (windows need context across fold edges), and scores test indices
only. Reported metrics are plain precision/recall/F1 plus the
point-adjusted F1 standard in time-series anomaly detection, where hitting
any point of a true anomaly segment counts the whole segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import TimeSeriesDataset
from .engine import execute
from .errors import BadScheme, InvalidPipeline, LengthMismatch, MissingGroundTruth
from .pipeline import PipelineDescription
from .values import ExecContext, LabelsValue, ValueKind

METRIC_NAMES = ("f1", "f1_pa", "precision", "recall")


@dataclass(frozen=True)
class KFold:
    k: int = 5


@dataclass(frozen=True)
class Holdout:
    train_fraction: float = 0.8


Scheme = KFold | Holdout


@dataclass(frozen=True)
class SplitPlan:
    scheme: Scheme
    folds: list[tuple[np.ndarray, np.ndarray]]  # (train, test), both sorted
    seed: int


def make_splits(n: int, scheme: Scheme, seed: int = 0) -> SplitPlan:
    """Index sets for evaluation; no shuffling, ascending order throughout."""
    everything = np.arange(n)
    if isinstance(scheme, KFold):
        if not 2 <= scheme.k <= n:
            raise BadScheme(f"kfold needs 2 <= k <= n, got k={scheme.k}, n={n}")
        folds = []
        for b in range(scheme.k):
            lo = b * n // scheme.k
            hi = (b + 1) * n // scheme.k
            test = everything[lo:hi]
            train = np.concatenate([everything[:lo], everything[hi:]])
            folds.append((train, test))
    elif isinstance(scheme, Holdout):
        if not 0 < scheme.train_fraction < 1:
            raise BadScheme(
                f"holdout needs 0 < train_fraction < 1, got {scheme.train_fraction}")
        cut = math.ceil(scheme.train_fraction * n)
        if cut >= n:
            raise BadScheme(f"train_fraction {scheme.train_fraction} leaves no test rows")
        folds = [(everything[:cut], everything[cut:])]
    else:
        raise BadScheme(f"unknown split scheme {scheme!r}")
    return SplitPlan(scheme=scheme, folds=folds, seed=seed)


@dataclass(frozen=True)
class ScoreReport:
    precision: float
    recall: float
    f1: float
    f1_pa: float
    tp: int
    fp: int
    fn: int
    tn: int
    pa_tp: int
    pa_fp: int
    pa_fn: int
    primary_metric: str = "f1"

    @property
    def primary_value(self) -> float:
        return getattr(self, self.primary_metric)

    def to_json(self) -> dict:
        return {
            "scores": {
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "f1_pa": self.f1_pa,
            },
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def point_adjust(predicted: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Fill every true-anomaly segment the prediction touches.

    Segments are maximal runs of truth 1; one predicted hit anywhere in the
    segment marks the whole segment predicted.
    """
    adjusted = predicted.copy()
    n = len(truth)
    start = None
    for i in range(n + 1):
        inside = i < n and truth[i] == 1
        if inside and start is None:
            start = i
        elif not inside and start is not None:
            if predicted[start:i].any():
                adjusted[start:i] = 1
            start = None
    return adjusted


def score(predicted: np.ndarray, truth: np.ndarray, primary_metric: str = "f1") -> ScoreReport:
    """Confusion counts and P/R/F1, plain and point-adjusted."""
    if truth is None:
        raise MissingGroundTruth("scoring requires ground-truth labels")
    if primary_metric not in METRIC_NAMES:
        raise ValueError(f"primary_metric must be one of {METRIC_NAMES}, got {primary_metric!r}")
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if len(predicted) != len(truth):
        raise LengthMismatch(
            f"predicted has length {len(predicted)}, truth has {len(truth)}")

    tp = int(((predicted == 1) & (truth == 1)).sum())
    fp = int(((predicted == 1) & (truth == 0)).sum())
    fn = int(((predicted == 0) & (truth == 1)).sum())
    tn = int(((predicted == 0) & (truth == 0)).sum())
    precision, recall, f1 = _prf(tp, fp, fn)

    adjusted = point_adjust(predicted, truth)
    pa_tp = int(((adjusted == 1) & (truth == 1)).sum())
    pa_fp = int(((adjusted == 1) & (truth == 0)).sum())
    pa_fn = int(((adjusted == 0) & (truth == 1)).sum())
    _, _, f1_pa = _prf(pa_tp, pa_fp, pa_fn)

    return ScoreReport(
        precision=precision, recall=recall, f1=f1, f1_pa=f1_pa,
        tp=tp, fp=fp, fn=fn, tn=tn,
        pa_tp=pa_tp, pa_fp=pa_fp, pa_fn=pa_fn,
        primary_metric=primary_metric,
    )


def combine_reports(reports: list[ScoreReport], primary_metric: str = "f1") -> ScoreReport:
    """Pool confusion counts across folds and recompute the metrics."""
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    tn = sum(r.tn for r in reports)
    pa_tp = sum(r.pa_tp for r in reports)
    pa_fp = sum(r.pa_fp for r in reports)
    pa_fn = sum(r.pa_fn for r in reports)
    precision, recall, f1 = _prf(tp, fp, fn)
    _, _, f1_pa = _prf(pa_tp, pa_fp, pa_fn)
    return ScoreReport(
        precision=precision, recall=recall, f1=f1, f1_pa=f1_pa,
        tp=tp, fp=fp, fn=fn, tn=tn,
        pa_tp=pa_tp, pa_fp=pa_fp, pa_fn=pa_fn,
        primary_metric=primary_metric,
    )


def evaluate_pipeline(
    ds: TimeSeriesDataset,
    p: PipelineDescription,
    primary_metric: str = "f1",
    scheme: Scheme = KFold(5),
    seed: int = 0,
) -> tuple[list[ScoreReport], float]:
    """Per-fold score reports and the mean of the primary metric.

    Each fold fits on its train indices, produces labels over the whole
    series, and is scored on its test indices only.
    """
    if ds.labels is None:
        raise MissingGroundTruth(f"dataset {ds.name!r} has no label column")
    if p.output_kind != ValueKind.LABELS:
        raise InvalidPipeline(
            ["pipeline output produces Scores; evaluation needs Labels "
             "(finish with a threshold step)"])
    plan = make_splits(ds.n, scheme, seed)
    reports = []
    for train, test in plan.folds:
        ctx = ExecContext(n_original=ds.n, train_indices=train)
        value, _ = execute(p, ds, ctx)
        assert isinstance(value, LabelsValue)
        reports.append(score(value.labels[test], ds.labels[test], primary_metric))
    aggregate = float(np.mean([r.primary_value for r in reports]))
    return reports, aggregate
