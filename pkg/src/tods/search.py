"""Automated pipeline search over finite template spaces.

A search space fixes the five-slot template (data processing, time-series
processing, feature analysis, detection, threshold) and lists per slot the
candidate primitives with explicit hyperparameter value grids, so the whole
space enumerates deterministically and results are exactly reproducible.
Random search draws a seeded permutation prefix (sampling without
replacement), which makes the best score monotone in the budget.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import TimeSeriesDataset
from .errors import (
    BudgetZero,
    EmptySlot,
    FailedCandidate,
    HyperparamOutOfRange,
    MalformedJson,
    NoLabels,
    UnknownHyperparam,
    UnknownPrimitive,
)
from .evaluation import KFold, Scheme, evaluate_pipeline
from .pipeline import PipelineDescription, build_pipeline, serialize_pipeline
from .registry import REGISTRY, normalize_rules

SLOT_NAMES = ("data_processing", "ts_processing", "feature_analysis", "detection", "threshold")
_DEFAULT_THRESHOLD = "tods.detection.threshold"


@dataclass(frozen=True)
class CandidatePrimitive:
    """One slot choice: a primitive and explicit per-hyperparameter value lists."""

    primitive: str
    grid: dict[str, list] = field(default_factory=dict)

    def points(self) -> list[dict]:
        """All grid assignments, lexicographic over sorted hyperparameter names."""
        names = sorted(self.grid)
        if not names:
            return [{}]
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(self.grid[n] for n in names))
        ]


@dataclass(frozen=True)
class SearchSpace:
    """Candidates per template slot plus an optional fixed reinforcement tail.

    The threshold slot may be omitted; a default-contamination threshold
    step is implied so every candidate still ends in labels.
    """

    slots: dict[str, list[CandidatePrimitive]]
    reinforcement_rules: list[dict] | None = None

    def __post_init__(self):
        for name in self.slots:
            if name not in SLOT_NAMES:
                raise EmptySlot(f"unknown slot {name!r}; expected one of {list(SLOT_NAMES)}")
        for name in SLOT_NAMES[:4]:
            if not self.slots.get(name):
                raise EmptySlot(f"slot {name!r} has no candidate primitives")
        if "threshold" in self.slots and not self.slots["threshold"]:
            raise EmptySlot("slot 'threshold' has no candidate primitives")
        for slot_index, name in enumerate(SLOT_NAMES):
            for candidate in self.slots.get(name, []):
                descriptor = REGISTRY.get(candidate.primitive)
                if descriptor is None:
                    raise UnknownPrimitive(candidate.primitive, step=slot_index)
                for hp, values in candidate.grid.items():
                    if hp not in descriptor.hyperparams:
                        raise UnknownHyperparam(slot_index, hp)
                    if not values:
                        raise HyperparamOutOfRange(
                            f"grid for {candidate.primitive}.{hp} is empty")
                    for v in values:
                        descriptor.hyperparams[hp].validate(hp, v)

    def slot_choices(self, name: str) -> list[tuple[str, dict]]:
        """(primitive, hyperparams) options for one slot, enumeration order."""
        if name == "threshold" and "threshold" not in self.slots:
            return [(_DEFAULT_THRESHOLD, {})]
        return [
            (candidate.primitive, point)
            for candidate in self.slots[name]
            for point in candidate.points()
        ]

    def size(self) -> int:
        total = 1
        for name in SLOT_NAMES:
            total *= len(self.slot_choices(name))
        return total


def parse_space(json_text: str) -> SearchSpace:
    """Read a search-space config: {slots: {name: [{primitive, grid}]}, reinforcement}."""
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"search space is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("slots"), dict):
        raise MalformedJson("search space must be an object with a 'slots' object")
    slots = {}
    for name, raw_candidates in doc["slots"].items():
        if not isinstance(raw_candidates, list):
            raise MalformedJson(f"slot {name!r} must hold a list of candidates")
        candidates = []
        for raw in raw_candidates:
            if not isinstance(raw, dict) or "primitive" not in raw:
                raise MalformedJson(f"slot {name!r}: candidate must be {{primitive, grid}}")
            grid = raw.get("grid", {})
            if not isinstance(grid, dict) or any(
                    not isinstance(v, list) for v in grid.values()):
                raise MalformedJson(
                    f"slot {name!r}: grid must map hyperparameters to value lists")
            candidates.append(CandidatePrimitive(primitive=raw["primitive"], grid=grid))
        slots[name] = candidates
    reinforcement = doc.get("reinforcement")
    rules = None
    if reinforcement is not None:
        if not isinstance(reinforcement, dict) or "rules" not in reinforcement:
            raise MalformedJson("reinforcement must be null or {rules: [...]}")
        rules = normalize_rules(reinforcement["rules"])
    return SearchSpace(slots=slots, reinforcement_rules=rules)


def _assemble(space: SearchSpace, choices) -> PipelineDescription:
    steps = []
    for i, (primitive, hyperparams) in enumerate(choices):
        argument = "scores" if i == 4 else "data"
        source = "inputs.0" if i == 0 else i - 1
        steps.append((primitive, hyperparams, {argument: source}))
    if space.reinforcement_rules is not None:
        steps.append((
            "tods.reinforcement.rule_based_filter",
            {"rules": space.reinforcement_rules},
            {"labels": len(steps) - 1, "dataset": "inputs.0"},
        ))
    return build_pipeline(steps)


def enumerate_space(space: SearchSpace) -> list[PipelineDescription]:
    """Every candidate pipeline, lexicographic over slot choice indices."""
    per_slot = [space.slot_choices(name) for name in SLOT_NAMES]
    return [_assemble(space, combo) for combo in itertools.product(*per_slot)]


@dataclass(frozen=True)
class SearchRecord:
    ordinal: int
    pipeline: PipelineDescription
    status: str  # ok | failed
    aggregate: float  # -1.0 for failed candidates
    fold_scores: list[float]
    wall_s: float
    error: str | None = None

    def to_json(self) -> dict:
        out = {
            "ordinal": self.ordinal,
            "pipeline_id": self.pipeline.id,
            "primitives": [s.primitive_id for s in self.pipeline.steps],
            "status": self.status,
            "aggregate": self.aggregate,
            "fold_scores": self.fold_scores,
            "wall_s": self.wall_s,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass(frozen=True)
class SearchResult:
    best: SearchRecord
    leaderboard: list[SearchRecord]
    evaluated: int
    space_size: int


def search(
    ds: TimeSeriesDataset,
    space: SearchSpace,
    strategy: str = "random",
    budget: int = 20,
    seed: int = 42,
    scheme: Scheme = KFold(5),
    primary_metric: str = "f1",
) -> SearchResult:
    """Evaluate up to ``budget`` candidates and rank them.

    random: seeded permutation prefix of the enumeration (no replacement);
    exhaustive: the enumeration prefix. Failed candidates keep score -1 in
    the leaderboard. Ties resolve to the lower enumeration ordinal.
    """
    if budget < 1:
        raise BudgetZero(f"budget must be >= 1, got {budget}")
    if ds.labels is None:
        raise NoLabels(f"dataset {ds.name!r} has no label column to search against")
    if strategy not in ("random", "exhaustive"):
        raise ValueError(f"strategy must be 'random' or 'exhaustive', got {strategy!r}")

    candidates = enumerate_space(space)
    n_eval = min(budget, len(candidates))
    if strategy == "exhaustive":
        chosen = range(n_eval)
    else:
        rng = np.random.default_rng(seed)
        chosen = rng.permutation(len(candidates))[:n_eval]

    records = []
    for ordinal in chosen:
        ordinal = int(ordinal)
        candidate = candidates[ordinal]
        started = time.perf_counter()
        try:
            reports, aggregate = evaluate_pipeline(
                ds, candidate, primary_metric=primary_metric, scheme=scheme, seed=seed)
            records.append(SearchRecord(
                ordinal=ordinal, pipeline=candidate, status="ok",
                aggregate=aggregate,
                fold_scores=[r.primary_value for r in reports],
                wall_s=time.perf_counter() - started,
            ))
        except Exception as exc:
            records.append(SearchRecord(
                ordinal=ordinal, pipeline=candidate, status="failed",
                aggregate=-1.0, fold_scores=[],
                wall_s=time.perf_counter() - started,
                error=f"{type(exc).__name__}: {exc}",
            ))
    leaderboard = sorted(records, key=lambda r: (-r.aggregate, r.ordinal))
    return SearchResult(
        best=leaderboard[0],
        leaderboard=leaderboard,
        evaluated=len(records),
        space_size=len(candidates),
    )


def export_best(record: SearchRecord) -> str:
    """Canonical JSON of a winning candidate, ready for deployment."""
    if record.status != "ok":
        raise FailedCandidate(
            f"candidate {record.ordinal} failed ({record.error}); nothing to export")
    return serialize_pipeline(record.pipeline)


def default_space() -> SearchSpace:
    """The built-in space the CLI searches when no config is given.

    Small enough (18 candidates) for an exhaustive pass within the default
    budget, and it contains the default pipeline's exact configuration.
    """
    return SearchSpace(slots={
        "data_processing": [
            CandidatePrimitive("tods.data_processing.timestamp_validation"),
        ],
        "ts_processing": [
            CandidatePrimitive("tods.timeseries_processing.standardize"),
            CandidatePrimitive("tods.timeseries_processing.moving_average",
                               {"window": [3]}),
        ],
        "feature_analysis": [
            CandidatePrimitive("tods.feature_analysis.window_statistics",
                               {"window": [1], "stride": [1]}),
        ],
        "detection": [
            CandidatePrimitive("tods.detection.iforest",
                               {"n_trees": [100], "subsample_size": [64], "seed": [0]}),
            CandidatePrimitive("tods.detection.zscore"),
            CandidatePrimitive("tods.detection.knn", {"k": [5]}),
        ],
        "threshold": [
            CandidatePrimitive(_DEFAULT_THRESHOLD,
                               {"contamination": [0.005, 0.01, 0.02]}),
        ],
    })


def default_pipeline() -> PipelineDescription:
    """Validation, standardization, per-point window statistics, isolation
    forest, and a 0.5% contamination threshold; the out-of-the-box detector.
    """
    return build_pipeline([
        ("tods.data_processing.timestamp_validation", {}, {"data": "inputs.0"}),
        ("tods.timeseries_processing.standardize", {}, {"data": 0}),
        ("tods.feature_analysis.window_statistics",
         {"window": 1, "stride": 1}, {"data": 1}),
        ("tods.detection.iforest",
         {"n_trees": 100, "subsample_size": 64, "seed": 0}, {"data": 2}),
        (_DEFAULT_THRESHOLD, {"contamination": 0.005}, {"scores": 3}),
    ])
