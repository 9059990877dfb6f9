// Client-side mirror of the backend's hyperparameter checks. The dialog
// uses these to block bad input inline; the pre-submit validator uses them
// so nothing reaching POST /api/runs can fail schema validation there.

import type { HyperparamSpecJson } from "./types";

export const RULE_ACTIONS = ["force_normal", "force_outlier"] as const;
export const RULE_PREDICATES = ["in_range", "outside_range", "time_in"] as const;

function checkRules(value: unknown): string | null {
  if (!Array.isArray(value)) return "rules must be a list";
  for (let i = 0; i < value.length; i++) {
    const rule = value[i];
    if (typeof rule !== "object" || rule === null || Array.isArray(rule))
      return `rule ${i} must be an object`;
    const r = rule as Record<string, unknown>;
    for (const key of Object.keys(r)) {
      if (!["feature", "predicate", "action"].includes(key))
        return `rule ${i} has unknown key '${key}'`;
    }
    if (!RULE_ACTIONS.includes(r.action as never))
      return `rule ${i} action must be one of ${RULE_ACTIONS.join(", ")}`;
    if (r.feature !== undefined && typeof r.feature !== "string")
      return `rule ${i} feature must be a string`;
    const p = r.predicate as Record<string, unknown> | undefined;
    if (!p || typeof p !== "object" || !RULE_PREDICATES.includes(p.kind as never))
      return `rule ${i} predicate kind must be one of ${RULE_PREDICATES.join(", ")}`;
    const args = p.args;
    if (!Array.isArray(args) || args.length !== 2 ||
        args.some((a) => typeof a !== "number" || !Number.isFinite(a)))
      return `rule ${i} predicate args must be two numbers`;
    if ((args[0] as number) > (args[1] as number))
      return `rule ${i} bounds disagree: ${args[0]} > ${args[1]}`;
  }
  return null;
}

// null means valid; otherwise a human-readable reason (shown inline in the
// dialog and echoed in pre-submit diagnostics).
export function checkValue(name: string, spec: HyperparamSpecJson, value: unknown): string | null {
  switch (spec.type) {
    case "int": {
      if (typeof value !== "number" || typeof value === "boolean" || !Number.isInteger(value))
        return `${name} must be an integer`;
      if (spec.range && (value < spec.range[0] || value > spec.range[1]))
        return `${name} must be in [${spec.range[0]}, ${spec.range[1]}]`;
      return null;
    }
    case "float": {
      if (typeof value !== "number" || !Number.isFinite(value))
        return `${name} must be a finite number`;
      if (spec.range && (value < spec.range[0] || value > spec.range[1]))
        return `${name} must be in [${spec.range[0]}, ${spec.range[1]}]`;
      return null;
    }
    case "enum":
      return spec.enum && spec.enum.includes(value as string)
        ? null
        : `${name} must be one of ${(spec.enum ?? []).join(", ")}`;
    case "str":
      return typeof value === "string" ? null : `${name} must be a string`;
    case "bool":
      return typeof value === "boolean" ? null : `${name} must be true or false`;
    case "float_list":
      return Array.isArray(value) && value.every((v) => typeof v === "number" && Number.isFinite(v))
        ? null
        : `${name} must be a list of numbers`;
    case "rules":
      return checkRules(value);
  }
}

export function defaultsFor(schema: Record<string, HyperparamSpecJson>): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const [name, spec] of Object.entries(schema)) {
    // defaults are JSON values; copy arrays so edits never alias the schema
    out[name] = structuredClone(spec.default);
  }
  return out;
}
