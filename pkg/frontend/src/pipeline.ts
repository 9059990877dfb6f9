// Pipeline file import/export. Export emits the same canonical bytes the
// backend writes: defaults materialized, keys sorted, content-derived id.
// That keeps UI-built files runnable by the CLI unchanged, and file-based
// round-trips byte-identical.

import {
  dumpsCompact,
  dumpsPretty,
  jarr,
  jbool,
  jfloat,
  jint,
  jobj,
  jstr,
  type JVal,
} from "./canonical";
import { defaultsFor } from "./hyperparams";
import type { PipelineJson, Registry, StepJson } from "./types";
import { SCHEMA_VERSION } from "./types";
import { PIPELINE_NAMESPACE, uuid5 } from "./uuid5";

export const REF_INPUT = "inputs.0";
const REF_RE = /^steps\.(0|[1-9][0-9]*)\.produce$/;

export function stepRef(index: number): string {
  return `steps.${index}.produce`;
}

// -1 for the pipeline input, else the referenced step index.
export function parseRef(text: string): number {
  if (text === REF_INPUT) return -1;
  const m = REF_RE.exec(text);
  if (!m) throw new Error(`bad data reference: ${text}`);
  return Number(m[1]);
}

function ruleToJVal(rule: Record<string, unknown>): JVal {
  const predicate = rule.predicate as { kind: string; args: [number, number] };
  return jobj({
    action: jstr(rule.action as string),
    feature: jstr((rule.feature as string | undefined) ?? "prediction"),
    predicate: jobj({
      args: jarr(predicate.args.map((a) => jfloat(a))),
      kind: jstr(predicate.kind),
    }),
  });
}

// Tag every hyperparam value with its schema type so ints and floats print
// the way the backend prints them ("window": 10 but "contamination": 0.01,
// "train_fraction": 1.0).
function hyperparamsToJVal(step: StepJson, registry: Registry): JVal {
  const descriptor = registry.get(step.primitive_id);
  if (!descriptor) throw new Error(`unknown primitive ${step.primitive_id}`);
  const out: Record<string, JVal> = {};
  const merged = { ...defaultsFor(descriptor.hyperparam_schema), ...step.hyperparams };
  for (const [name, value] of Object.entries(merged)) {
    const spec = descriptor.hyperparam_schema[name];
    if (!spec) throw new Error(`unknown hyperparam ${step.primitive_id}.${name}`);
    switch (spec.type) {
      case "int": out[name] = jint(value as number); break;
      case "float": out[name] = jfloat(value as number); break;
      case "bool": out[name] = jbool(value as boolean); break;
      case "str": case "enum": out[name] = jstr(value as string); break;
      case "float_list": out[name] = jarr((value as number[]).map(jfloat)); break;
      case "rules":
        out[name] = jarr((value as Record<string, unknown>[]).map(ruleToJVal));
        break;
    }
  }
  return jobj(out);
}

function bodyToJVal(steps: StepJson[], output: string, registry: Registry): JVal {
  return jobj({
    inputs: jarr([jstr("dataset")]),
    outputs: jarr([jstr(output)]),
    schema_version: jstr(SCHEMA_VERSION),
    steps: jarr(steps.map((step) => jobj({
      arguments: jobj(Object.fromEntries(
        Object.entries(step.arguments).map(([n, ref]) => [n, jstr(ref)]),
      )),
      hyperparams: hyperparamsToJVal(step, registry),
      primitive_id: jstr(step.primitive_id),
    }))),
  });
}

export function derivePipelineId(steps: StepJson[], output: string, registry: Registry): string {
  return uuid5(PIPELINE_NAMESPACE, dumpsCompact(bodyToJVal(steps, output, registry)));
}

export function serializePipeline(doc: PipelineJson, registry: Registry): string {
  const output = doc.outputs[0];
  if (doc.outputs.length !== 1 || output === undefined)
    throw new Error("pipeline must have exactly one output");
  const body = bodyToJVal(doc.steps, output, registry);
  const id = doc.id ?? derivePipelineId(doc.steps, output, registry);
  const full = jobj({ id: jstr(id), ...( body as { t: "obj"; v: Record<string, JVal> }).v });
  return dumpsPretty(full) + "\n";
}

// Structural parse only; semantic checks (kinds, ranges, references) live
// in validate.ts so they can be reported as a diagnostics list, not throws.
export function parsePipeline(text: string): PipelineJson {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error("not valid JSON");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw))
    throw new Error("pipeline must be a JSON object");
  const doc = raw as Record<string, unknown>;
  if (doc.schema_version !== SCHEMA_VERSION)
    throw new Error(`unknown schema version ${String(doc.schema_version)}`);
  if (!Array.isArray(doc.steps) || doc.steps.length === 0)
    throw new Error("pipeline needs a non-empty steps list");
  if (!Array.isArray(doc.outputs) || doc.outputs.length !== 1)
    throw new Error("pipeline needs exactly one output");
  const steps: StepJson[] = doc.steps.map((step, i) => {
    const s = step as Record<string, unknown>;
    if (typeof s.primitive_id !== "string")
      throw new Error(`step ${i} needs a primitive_id`);
    return {
      primitive_id: s.primitive_id,
      hyperparams: (s.hyperparams as Record<string, unknown>) ?? {},
      arguments: (s.arguments as Record<string, string>) ?? {},
    };
  });
  return {
    id: typeof doc.id === "string" ? doc.id : undefined,
    schema_version: SCHEMA_VERSION,
    inputs: ["dataset"],
    steps,
    outputs: doc.outputs as string[],
  };
}
