"""Pipeline validation and execution.

``validate`` re-checks the DAG semantically (argument wiring, kind
compatibility, reachability) and returns human-readable diagnostics;
``execute`` runs the steps in index order over a dataset, recording a
per-step trace. Execution is a pure function of (pipeline, dataset,
embedded seeds): repeated runs are bit-identical.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .dataset import TimeSeriesDataset
from .errors import InvalidPipeline, StepFailed
from .pipeline import PipelineDescription
from .registry import REGISTRY
from .values import ExecContext, TableValue, Value, ValueKind


@dataclass
class StepTrace:
    primitive_id: str
    input_shapes: dict[str, list[int]]
    output_shape: list[int] | None
    wall_ms: float
    status: str  # ok | failed
    error: str | None = None

    def to_json(self) -> dict:
        out = {
            "primitive_id": self.primitive_id,
            "input_shapes": self.input_shapes,
            "output_shape": self.output_shape,
            "wall_ms": self.wall_ms,
            "status": self.status,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class ExecutionTrace:
    steps: list[StepTrace] = field(default_factory=list)

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


def validate(p: PipelineDescription) -> list[str]:
    """Diagnostics preventing execution; empty list means runnable.

    Reference order is checked again here even though the parser already
    enforces it: defense in depth for programmatically built pipelines.
    """
    diagnostics = []
    produced: list[ValueKind] = []
    reaches_input = []
    for k, step in enumerate(p.steps):
        descriptor = REGISTRY.get(step.primitive_id)
        if descriptor is None:
            diagnostics.append(f"step {k}: unknown primitive {step.primitive_id!r}")
            produced.append(None)
            reaches_input.append(False)
            continue
        connected = False
        for name, ref in step.arguments.items():
            if name not in descriptor.arguments:
                diagnostics.append(
                    f"step {k}: primitive {step.primitive_id} has no argument {name!r}")
                continue
            expected = descriptor.arguments[name]
            if ref.is_input:
                actual = ValueKind.TABLE
                connected = True
            elif 0 <= ref.step_index < k:
                actual = produced[ref.step_index]
                connected = connected or reaches_input[ref.step_index]
            else:
                diagnostics.append(
                    f"step {k}: argument {name!r} references step {ref.step_index}, "
                    f"which is not strictly earlier")
                continue
            if actual is not None and actual != expected:
                diagnostics.append(
                    f"step {k}: argument {name!r} expects {expected.value}, "
                    f"got {actual.value} from {ref.render()}")
        for name in descriptor.arguments:
            if name not in step.arguments:
                diagnostics.append(f"step {k}: missing argument {name!r}")
        produced.append(descriptor.produces)
        reaches_input.append(connected)
        if not connected:
            diagnostics.append(f"step {k}: not reachable from the pipeline input")

    out = p.output
    if out.is_input or not 0 <= out.step_index < len(p.steps):
        diagnostics.append(f"output reference {out.render()} does not name a step")
    else:
        kind = produced[out.step_index]
        if kind is not None and kind not in (ValueKind.SCORES, ValueKind.LABELS):
            diagnostics.append(
                f"output step {out.step_index} produces {kind.value}, "
                f"must produce Scores or Labels")
    return diagnostics


def execute_steps(
    p: PipelineDescription,
    ds: TimeSeriesDataset,
    ctx: ExecContext | None = None,
) -> tuple[list[Value], ExecutionTrace]:
    """Run every step; returns all step outputs plus the trace.

    Raises InvalidPipeline when validate() is non-empty and StepFailed
    (carrying the partial trace) when a step raises.
    """
    diagnostics = validate(p)
    if diagnostics:
        raise InvalidPipeline(diagnostics)
    if ctx is None:
        ctx = ExecContext(n_original=ds.n)

    root = TableValue.from_dataset(ds)
    values: list[Value] = []
    trace = ExecutionTrace()
    for k, step in enumerate(p.steps):
        descriptor = REGISTRY[step.primitive_id]
        inputs = {
            name: root if ref.is_input else values[ref.step_index]
            for name, ref in step.arguments.items()
        }
        shapes = {name: list(v.shape()) for name, v in inputs.items()}
        started = time.perf_counter()
        try:
            out = descriptor.runner(step.hyperparams, inputs, ctx)
        except Exception as exc:
            trace.steps.append(StepTrace(
                primitive_id=step.primitive_id,
                input_shapes=shapes,
                output_shape=None,
                wall_ms=(time.perf_counter() - started) * 1000.0,
                status="failed",
                error=f"{type(exc).__name__}: {exc}",
            ))
            raise StepFailed(k, exc, trace) from exc
        trace.steps.append(StepTrace(
            primitive_id=step.primitive_id,
            input_shapes=shapes,
            output_shape=list(out.shape()),
            wall_ms=(time.perf_counter() - started) * 1000.0,
            status="ok",
        ))
        values.append(out)
    return values, trace


def execute(
    p: PipelineDescription,
    ds: TimeSeriesDataset,
    ctx: ExecContext | None = None,
) -> tuple[Value, ExecutionTrace]:
    """Run the pipeline and return its declared output value and trace."""
    values, trace = execute_steps(p, ds, ctx)
    return values[p.output.step_index], trace


def last_scores(values: list[Value]):
    """Score vector of the final scores-producing step, or None."""
    for value in reversed(values):
        if value.kind == ValueKind.SCORES:
            return value.scores
    return None
