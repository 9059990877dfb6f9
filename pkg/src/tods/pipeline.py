"""Pipeline description language ("tsods-1.0").

A pipeline is a JSON document: one dataset input, an ordered list of
primitive steps whose arguments reference earlier outputs only (so cycles
cannot be written down), and exactly one output reference to a scores- or
labels-producing step. Parsing materializes hyperparameter defaults;
serialization is canonical (sorted keys, two-space indent, shortest
round-trip floats), so parse and serialize are mutually inverse.
"""

from __future__ import annotations

import json
import re
import uuid
from dataclasses import dataclass, field

from .errors import (
    ForwardReference,
    MalformedJson,
    MalformedPipeline,
    UnknownHyperparam,
    UnknownPrimitive,
    UnknownSchemaVersion,
)
from .registry import REGISTRY
from .values import ValueKind

SCHEMA_VERSION = "tsods-1.0"
PIPELINE_INPUT_NAME = "dataset"

_REF_PATTERN = re.compile(r"^steps\.(0|[1-9][0-9]*)\.produce$")
_ID_NAMESPACE = uuid.uuid5(uuid.NAMESPACE_URL, "tsods-pipeline")


@dataclass(frozen=True)
class DataReference:
    """An edge source: the pipeline input or a prior step's output."""

    step_index: int = -1  # -1 means the pipeline input

    @property
    def is_input(self) -> bool:
        return self.step_index < 0

    def render(self) -> str:
        return "inputs.0" if self.is_input else f"steps.{self.step_index}.produce"

    @staticmethod
    def parse(text, max_step: int, where: str) -> "DataReference":
        """max_step: first step index that would be a forward reference."""
        if not isinstance(text, str):
            raise MalformedPipeline(f"{where}: reference must be a string, got {text!r}")
        if text == "inputs.0":
            return DataReference()
        match = _REF_PATTERN.match(text)
        if not match:
            raise MalformedPipeline(
                f"{where}: reference must be 'inputs.0' or 'steps.<k>.produce', got {text!r}")
        k = int(match.group(1))
        if k >= max_step:
            raise ForwardReference(
                f"{where}: reference to step {k} does not point strictly backwards")
        return DataReference(step_index=k)


@dataclass(frozen=True)
class PipelineStep:
    primitive_id: str
    hyperparams: dict = field(default_factory=dict)
    arguments: dict[str, DataReference] = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineDescription:
    id: str
    steps: list[PipelineStep]
    output: DataReference
    schema_version: str = SCHEMA_VERSION

    @property
    def output_kind(self) -> ValueKind:
        return REGISTRY[self.steps[self.output.step_index].primitive_id].produces


def _require_keys(obj: dict, required: set[str], optional: set[str], where: str):
    missing = required - set(obj)
    if missing:
        raise MalformedPipeline(f"{where}: missing keys {sorted(missing)}")
    extra = set(obj) - required - optional
    if extra:
        raise MalformedPipeline(f"{where}: unknown keys {sorted(extra)}")


def _parse_step(index: int, raw) -> PipelineStep:
    where = f"steps[{index}]"
    if not isinstance(raw, dict):
        raise MalformedPipeline(f"{where}: step must be an object")
    _require_keys(raw, {"primitive_id", "arguments"}, {"hyperparams"}, where)

    primitive_id = raw["primitive_id"]
    descriptor = REGISTRY.get(primitive_id)
    if descriptor is None:
        raise UnknownPrimitive(primitive_id, step=index)

    given = raw.get("hyperparams", {})
    if not isinstance(given, dict):
        raise MalformedPipeline(f"{where}: hyperparams must be an object")
    hyperparams = {}
    for name, spec in descriptor.hyperparams.items():
        if name in given:
            hyperparams[name] = spec.validate(name, given[name])
        else:
            hyperparams[name] = spec.default
    for name in given:
        if name not in descriptor.hyperparams:
            raise UnknownHyperparam(index, name)

    raw_args = raw["arguments"]
    if not isinstance(raw_args, dict):
        raise MalformedPipeline(f"{where}: arguments must be an object")
    arguments = {
        name: DataReference.parse(ref, index, f"{where}.arguments[{name}]")
        for name, ref in raw_args.items()
    }
    return PipelineStep(primitive_id=primitive_id, hyperparams=hyperparams,
                        arguments=arguments)


def parse_pipeline(json_text: str) -> PipelineDescription:
    """Parse and fully check pipeline JSON; defaults are materialized.

    Raises MalformedJson, MalformedPipeline, UnknownSchemaVersion,
    UnknownPrimitive, UnknownHyperparam, HyperparamOutOfRange, or
    ForwardReference.
    """
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"pipeline text is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedPipeline("pipeline document must be a JSON object")
    _require_keys(doc, {"schema_version", "inputs", "steps", "outputs"}, {"id"}, "pipeline")

    if doc["schema_version"] != SCHEMA_VERSION:
        raise UnknownSchemaVersion(
            f"expected schema_version {SCHEMA_VERSION!r}, got {doc['schema_version']!r}")
    if doc["inputs"] != [PIPELINE_INPUT_NAME]:
        raise MalformedPipeline(f'inputs must be ["{PIPELINE_INPUT_NAME}"], got {doc["inputs"]!r}')

    raw_steps = doc["steps"]
    if not isinstance(raw_steps, list) or not raw_steps:
        raise MalformedPipeline("steps must be a non-empty list")
    steps = [_parse_step(i, raw) for i, raw in enumerate(raw_steps)]

    raw_outputs = doc["outputs"]
    if not isinstance(raw_outputs, list) or len(raw_outputs) != 1:
        raise MalformedPipeline("outputs must be a list with exactly one reference")
    output = DataReference.parse(raw_outputs[0], len(steps), "outputs[0]")
    if output.is_input:
        raise MalformedPipeline("output must reference a step, not the pipeline input")
    out_kind = REGISTRY[steps[output.step_index].primitive_id].produces
    if out_kind not in (ValueKind.SCORES, ValueKind.LABELS):
        raise MalformedPipeline(
            f"output step produces {out_kind.value}, must produce Scores or Labels")

    if "id" in doc:
        if not isinstance(doc["id"], str):
            raise MalformedPipeline("id must be a string")
        try:
            pipeline_id = str(uuid.UUID(doc["id"]))
        except ValueError:
            raise MalformedPipeline(f"id {doc['id']!r} is not a UUID") from None
    else:
        pipeline_id = derive_pipeline_id(steps, output)
    return PipelineDescription(id=pipeline_id, steps=steps, output=output)


def _body_dict(steps: list[PipelineStep], output: DataReference) -> dict:
    return {
        "inputs": [PIPELINE_INPUT_NAME],
        "outputs": [output.render()],
        "schema_version": SCHEMA_VERSION,
        "steps": [
            {
                "arguments": {n: ref.render() for n, ref in step.arguments.items()},
                "hyperparams": step.hyperparams,
                "primitive_id": step.primitive_id,
            }
            for step in steps
        ],
    }


def derive_pipeline_id(steps: list[PipelineStep], output: DataReference) -> str:
    """Content-derived UUID: equal structures get equal ids."""
    body = json.dumps(_body_dict(steps, output), sort_keys=True, separators=(",", ":"))
    return str(uuid.uuid5(_ID_NAMESPACE, body))


def serialize_pipeline(p: PipelineDescription) -> str:
    """Canonical JSON: sorted keys, indent 2, trailing newline."""
    doc = {"id": p.id, **_body_dict(p.steps, p.output)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_pipeline(path) -> PipelineDescription:
    """Read and parse a pipeline JSON file."""
    with open(path, encoding="utf-8") as fh:
        return parse_pipeline(fh.read())


def build_pipeline(step_specs, output_step: int | None = None) -> PipelineDescription:
    """Assemble a pipeline programmatically.

    step_specs: list of (primitive_id, hyperparams, arguments) with arguments
    as {name: "inputs.0" | step index}. The output defaults to the last step.
    Routed through parse_pipeline so the result is identical to one read from
    a file.
    """
    raw_steps = []
    for primitive_id, hyperparams, arguments in step_specs:
        raw_steps.append({
            "primitive_id": primitive_id,
            "hyperparams": hyperparams,
            "arguments": {
                name: ref if isinstance(ref, str) else f"steps.{ref}.produce"
                for name, ref in arguments.items()
            },
        })
    out = output_step if output_step is not None else len(raw_steps) - 1
    doc = {
        "schema_version": SCHEMA_VERSION,
        "inputs": [PIPELINE_INPUT_NAME],
        "steps": raw_steps,
        "outputs": [f"steps.{out}.produce"],
    }
    return parse_pipeline(json.dumps(doc))
