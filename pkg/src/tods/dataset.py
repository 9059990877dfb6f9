"""Timestamp-indexed datasets and CSV ingestion.

A :class:`TimeSeriesDataset` is an immutable bundle of a timestamp column,
named float feature columns of equal length, and an optional binary label
column marking ground-truth outliers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadTargetIndex,
    BadTimestampColumn,
    EmptyInput,
    NonNumericCell,
    RaggedRows,
)

TIMESTAMP_HEADER = "timestamp"


@dataclass(frozen=True)
class TimeSeriesDataset:
    """One time series table: timestamps, feature columns, optional labels.

    All columns have identical length n >= 1. Labels, when present, hold only
    0 and 1 (1 = outlier). Arrays are marked read-only; instances are safe to
    share across threads.
    """

    timestamps: np.ndarray
    features: dict[str, np.ndarray]
    labels: np.ndarray | None = None
    name: str = "dataset"

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        n = len(ts)
        if n < 1:
            raise ValueError("dataset needs at least one row")
        feats = {}
        for col, values in self.features.items():
            arr = np.asarray(values, dtype=np.float64)
            if len(arr) != n:
                raise ValueError(f"column {col!r} has length {len(arr)}, expected {n}")
            arr.setflags(write=False)
            feats[col] = arr
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if len(labels) != n:
                raise ValueError(f"labels have length {len(labels)}, expected {n}")
            if not np.isin(labels, (0, 1)).all():
                raise ValueError("labels must contain only 0 and 1")
            labels.setflags(write=False)
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.timestamps)

    @property
    def feature_names(self) -> list[str]:
        return list(self.features)

    def feature_matrix(self) -> np.ndarray:
        """All feature columns stacked as an (n, d) float matrix."""
        if not self.features:
            return np.empty((self.n, 0))
        return np.column_stack(list(self.features.values()))

    def replace(self, **changes) -> "TimeSeriesDataset":
        """Copy with some fields swapped out (re-validates invariants)."""
        fields = dict(
            timestamps=self.timestamps,
            features=self.features,
            labels=self.labels,
            name=self.name,
        )
        fields.update(changes)
        return TimeSeriesDataset(**fields)


def _parse_cell(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise NonNumericCell(row, column, cell) from None


def generate_dataset(
    csv_text: str,
    target_index: int | None = None,
    timestamp_column: int | None = None,
    name: str = "dataset",
) -> TimeSeriesDataset:
    """Build a dataset from CSV text (RFC 4180, header row required).

    ``target_index`` addresses the 0-based header column holding binary
    ground-truth labels. The timestamp column is ``timestamp_column`` when
    given, else the column named "timestamp", else an ordinal index 0..n-1 is
    synthesized. All remaining columns become float features in header order;
    empty cells parse as NaN (missing).
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInput("no header row") from None
    header = [h.strip() for h in header]
    width = len(header)

    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue  # blank line
        if len(row) != width:
            raise RaggedRows(f"row {line_no} has {len(row)} cells, header has {width}")
        rows.append((line_no, row))
    if not rows:
        raise EmptyInput("no data rows")
    n = len(rows)

    if timestamp_column is not None:
        if not 0 <= timestamp_column < width:
            raise BadTimestampColumn(f"timestamp column {timestamp_column} out of range for {width} columns")
        ts_idx = timestamp_column
    elif TIMESTAMP_HEADER in header:
        ts_idx = header.index(TIMESTAMP_HEADER)
    else:
        ts_idx = None

    if target_index is not None:
        if not 0 <= target_index < width:
            raise BadTargetIndex(f"target index {target_index} out of range for {width} columns")
        if target_index == ts_idx:
            raise BadTargetIndex("target column and timestamp column coincide")

    if ts_idx is None:
        timestamps = np.arange(n, dtype=np.int64)
    else:
        raw = np.array([_parse_cell(row[ts_idx], line, header[ts_idx]) for line, row in rows])
        if not np.isfinite(raw).all():
            bad = int(np.flatnonzero(~np.isfinite(raw))[0])
            raise NonNumericCell(rows[bad][0], header[ts_idx], rows[bad][1][ts_idx])
        timestamps = raw.astype(np.int64)

    labels = None
    if target_index is not None:
        col = header[target_index]
        raw = np.array([_parse_cell(row[target_index], line, col) for line, row in rows])
        if not np.isin(raw, (0.0, 1.0)).all():
            raise BadTargetIndex(f"target column {col!r} contains values other than 0/1")
        labels = raw.astype(np.int64)

    features: dict[str, np.ndarray] = {}
    for idx, col in enumerate(header):
        if idx == ts_idx or idx == target_index:
            continue
        features[col] = np.array([_parse_cell(row[idx], line, col) for line, row in rows])

    return TimeSeriesDataset(timestamps=timestamps, features=features, labels=labels, name=name)
