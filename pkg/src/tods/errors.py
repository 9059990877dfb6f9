"""Exception taxonomy.

Every error a primitive, parser, or engine stage can raise by contract has a
named class here; ``TodsError.name`` is the stable identifier used in CLI
messages and service error bodies.
"""

from __future__ import annotations


class TodsError(Exception):
    """Base class for all library errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# --- dataset ingestion ------------------------------------------------------

class EmptyInput(TodsError):
    """CSV has a header but no data rows."""


class BadTargetIndex(TodsError):
    """Target column index out of range, or the column is not binary 0/1."""


class BadTimestampColumn(TodsError):
    """Explicit timestamp column index does not address an existing column."""


class NonNumericCell(TodsError):
    """A feature or timestamp cell failed numeric parsing."""

    def __init__(self, row: int, column: str, cell: str):
        super().__init__(f"row {row}, column {column!r}: cannot parse {cell!r} as a number")
        self.row = row
        self.column = column
        self.cell = cell


class RaggedRows(TodsError):
    """A data row has a different number of cells than the header."""


# --- pipeline language ------------------------------------------------------

class MalformedJson(TodsError):
    """Pipeline text is not valid JSON."""


class MalformedPipeline(TodsError):
    """Pipeline JSON is structurally invalid (missing/extra fields, bad references)."""


class UnknownSchemaVersion(TodsError):
    """schema_version is not one this library understands."""


class UnknownPrimitive(TodsError):
    def __init__(self, primitive_id: str, step: int | None = None):
        where = f" (step {step})" if step is not None else ""
        super().__init__(f"unknown primitive {primitive_id!r}{where}")
        self.primitive_id = primitive_id
        self.step = step


class UnknownHyperparam(TodsError):
    def __init__(self, step: int, name: str):
        super().__init__(f"step {step}: primitive has no hyperparameter {name!r}")
        self.step = step
        self.hyperparam = name


class HyperparamOutOfRange(TodsError):
    """A hyperparameter value violates its declared type, range, or enum."""


class ForwardReference(TodsError):
    """A step argument references the step itself or a later step."""


# --- processing primitives --------------------------------------------------

class UnsortedTimestamps(TodsError):
    """Timestamps are not strictly increasing and the policy forbids sorting."""


class DuplicateTimestamp(TodsError):
    """Two rows share a timestamp and the policy forbids collapsing them."""


class AllMissingColumn(TodsError):
    """A column contains no observed value to impute from."""


class NonPositivePeriod(TodsError):
    """Seasonal period must be at least 2."""


class PeriodTooLarge(TodsError):
    """Series shorter than two full periods."""


class NonPositiveWindow(TodsError):
    """Window must be at least 1."""


class WindowTooLarge(TodsError):
    """Window exceeds the series length."""


class OrderTooLarge(TodsError):
    """Differencing order must be smaller than the series length."""


# --- feature primitives -----------------------------------------------------

class LagTooLarge(TodsError):
    """max_lag must be smaller than the series length."""


class TooManyBins(TodsError):
    """Requested more DFT bins than fit below the Nyquist limit."""


class NegativeEntry(TodsError):
    """NMF input matrix must be entrywise nonnegative and finite."""


class RankTooLarge(TodsError):
    """NMF rank must satisfy 1 <= rank <= min(m, n)."""


# --- detection primitives ---------------------------------------------------

class SubsampleTooSmall(TodsError):
    """Isolation forest subsample size must be at least 2."""


class KTooLarge(TodsError):
    """k-NN needs strictly more rows than k."""


class SeriesTooShort(TodsError):
    """Autoregressive fit needs at least 3*order points."""


class ContaminationOutOfRange(TodsError):
    """Contamination must lie in [0, 1]."""


class UnknownFeature(TodsError):
    """A rule references a feature column the dataset does not have."""


# --- engine / evaluation ----------------------------------------------------

class StepFailed(TodsError):
    """A pipeline step raised; carries the index, the cause, and the trace."""

    def __init__(self, step_index: int, cause: Exception, trace=None):
        super().__init__(f"step {step_index} failed: {type(cause).__name__}: {cause}")
        self.step_index = step_index
        self.cause = cause
        self.trace = trace


class InvalidPipeline(TodsError):
    """Pipeline has validation diagnostics and cannot be executed."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)


class BadScheme(TodsError):
    """Split scheme parameters are out of range for the dataset."""


class MissingGroundTruth(TodsError):
    """Scoring requires a dataset with labels."""


class LengthMismatch(TodsError):
    """Predicted and true label vectors differ in length."""


# --- searcher ---------------------------------------------------------------

class EmptySlot(TodsError):
    """A search-space slot has no candidate primitives."""


class BudgetZero(TodsError):
    """Search budget must be at least 1."""


class NoLabels(TodsError):
    """Search needs a labeled dataset to score candidates."""


class FailedCandidate(TodsError):
    """Cannot export a candidate whose evaluation failed."""
