"""Values flowing along pipeline edges.

Three kinds move between steps: tables (feature columns plus an index map
back to the original rows), per-point anomaly scores, and binary labels.
Scores and labels are always full original length; positions a step cannot
score (window tails, differenced heads, dropped rows) hold NaN scores and
0 labels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dataset import TimeSeriesDataset


class ValueKind(str, enum.Enum):
    TABLE = "Table"
    SCORES = "Scores"
    LABELS = "Labels"


@dataclass(frozen=True)
class TableValue:
    """A table mid-pipeline.

    ``row_index_map[i]`` is the original dataset row that row i derives from
    (a window's row maps to its start). Strictly increasing except after an
    explicit reorder (timestamp sorting).
    """

    timestamps: np.ndarray
    columns: dict[str, np.ndarray]
    row_index_map: np.ndarray
    labels: np.ndarray | None = None

    @property
    def kind(self) -> ValueKind:
        return ValueKind.TABLE

    @property
    def n_rows(self) -> int:
        return len(self.row_index_map)

    @property
    def column_names(self) -> list[str]:
        return list(self.columns)

    def matrix(self) -> np.ndarray:
        if not self.columns:
            return np.empty((self.n_rows, 0))
        return np.column_stack(list(self.columns.values()))

    def shape(self) -> tuple[int, int]:
        return (self.n_rows, len(self.columns))

    @staticmethod
    def from_dataset(ds: TimeSeriesDataset) -> "TableValue":
        return TableValue(
            timestamps=ds.timestamps,
            columns=dict(ds.features),
            row_index_map=np.arange(ds.n),
            labels=ds.labels,
        )

    def with_columns(self, columns: dict[str, np.ndarray]) -> "TableValue":
        """Same rows, new columns."""
        return TableValue(self.timestamps, columns, self.row_index_map, self.labels)

    def take_rows(self, rows: np.ndarray) -> "TableValue":
        return TableValue(
            timestamps=self.timestamps[rows],
            columns={c: v[rows] for c, v in self.columns.items()},
            row_index_map=self.row_index_map[rows],
            labels=None if self.labels is None else self.labels[rows],
        )


@dataclass(frozen=True)
class ScoresValue:
    """Anomaly scores aligned to original rows; higher = more anomalous.

    NaN marks rows excluded by upstream edge effects. Infinities are
    forbidden and at least one entry must be a real score.
    """

    scores: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if np.isinf(arr).any():
            raise ValueError("anomaly scores must be finite or NaN")
        if not np.isfinite(arr).any():
            raise ValueError("anomaly scores are all NaN")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    @property
    def kind(self) -> ValueKind:
        return ValueKind.SCORES

    def shape(self) -> tuple[int]:
        return (len(self.scores),)

    @staticmethod
    def from_rows(row_scores: np.ndarray, row_index_map: np.ndarray, n_original: int) -> "ScoresValue":
        """Scatter per-row scores back onto the original index space."""
        full = np.full(n_original, np.nan)
        full[row_index_map] = row_scores
        return ScoresValue(full)


@dataclass(frozen=True)
class LabelsValue:
    """Predicted outlier labels over the original rows, values in {0, 1}."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels, dtype=np.int64)
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("labels must contain only 0 and 1")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @property
    def kind(self) -> ValueKind:
        return ValueKind.LABELS

    def shape(self) -> tuple[int]:
        return (len(self.labels),)


Value = TableValue | ScoresValue | LabelsValue


@dataclass(frozen=True)
class ExecContext:
    """Per-execution facts a primitive runner may consult.

    ``n_original`` sizes full-length score/label vectors. ``train_indices``
    (original-row index space, or None for fit-on-everything) restricts
    which rows fit-capable primitives may learn statistics from; produce
    always covers all rows.
    """

    n_original: int
    train_indices: np.ndarray | None = None

    def train_mask(self, row_index_map: np.ndarray) -> np.ndarray:
        """Mask over table rows whose original row may be used for fitting."""
        if self.train_indices is None:
            return np.ones(len(row_index_map), dtype=bool)
        return np.isin(row_index_map, self.train_indices)
