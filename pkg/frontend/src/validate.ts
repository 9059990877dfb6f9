// Pre-submit validation of a pipeline document. Mirrors the backend's
// checks for reference order, kind compatibility, and hyperparameter
// schemas, so a document that passes here cannot be rejected by
// POST /api/pipelines/validate for those reasons.

import { checkValue } from "./hyperparams";
import { parseRef, REF_INPUT } from "./pipeline";
import type { PipelineJson, Registry, ValueKindName } from "./types";

export function checkPipeline(doc: PipelineJson, registry: Registry): string[] {
  const diagnostics: string[] = [];
  const produced: (ValueKindName | null)[] = [];

  doc.steps.forEach((step, i) => {
    const descriptor = registry.get(step.primitive_id);
    if (!descriptor) {
      diagnostics.push(`step ${i}: unknown primitive ${step.primitive_id}`);
      produced.push(null);
      return;
    }
    produced.push(descriptor.produces);

    for (const [name, value] of Object.entries(step.hyperparams)) {
      const spec = descriptor.hyperparam_schema[name];
      if (!spec) {
        diagnostics.push(`step ${i}: unknown hyperparam '${name}'`);
        continue;
      }
      const problem = checkValue(name, spec, value);
      if (problem) diagnostics.push(`step ${i}: ${problem}`);
    }

    for (const [input, expected] of Object.entries(descriptor.arguments)) {
      const ref = step.arguments[input];
      if (ref === undefined) {
        diagnostics.push(`step ${i}: missing argument '${input}'`);
        continue;
      }
      let source: number;
      try {
        source = parseRef(ref);
      } catch {
        diagnostics.push(`step ${i}: bad reference '${ref}'`);
        continue;
      }
      if (source >= i) {
        diagnostics.push(
          `step ${i}: argument '${input}' references steps.${source} before it is produced`,
        );
        continue;
      }
      const got = source < 0 ? "Table" : produced[source];
      if (got && got !== expected)
        diagnostics.push(`step ${i}: argument '${input}' expects ${expected}, got ${got}`);
    }
    for (const name of Object.keys(step.arguments)) {
      if (!(name in descriptor.arguments))
        diagnostics.push(`step ${i}: unexpected argument '${name}'`);
    }
  });

  const output = doc.outputs[0];
  if (doc.outputs.length !== 1 || output === undefined) {
    diagnostics.push("pipeline must declare exactly one output");
  } else if (output === REF_INPUT) {
    diagnostics.push("output must reference a step, not the pipeline input");
  } else {
    try {
      const sink = parseRef(output);
      if (sink < 0 || sink >= doc.steps.length) {
        diagnostics.push(`output references missing step ${sink}`);
      } else {
        const kind = produced[sink];
        if (kind === "Table")
          diagnostics.push("output must produce Scores or Labels, got Table");
      }
    } catch {
      diagnostics.push(`bad output reference '${output}'`);
    }
  }
  return diagnostics;
}
