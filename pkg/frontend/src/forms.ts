// Hyperparameter dialog model. The dialog itself is DOM (app.ts); the
// field list, text parsing, and ok/cancel semantics live here.
//
// Numeric fields edit as text and parse on input; enum fields are
// dropdowns restricted to the schema's options; rules edit as JSON text.
// Invalid entries attach an inline message and block OK.

import { checkValue } from "./hyperparams";
import type { HyperparamSpecJson } from "./types";

export interface FieldSpec {
  name: string;
  spec: HyperparamSpecJson;
  // what the input element should initially display
  initial: string;
  options?: string[]; // enum only
}

export function fieldsFor(
  schema: Record<string, HyperparamSpecJson>,
  values: Record<string, unknown>,
): FieldSpec[] {
  return Object.entries(schema).map(([name, spec]) => ({
    name,
    spec,
    initial: renderValue(spec, values[name] ?? spec.default),
    options: spec.type === "enum" ? spec.enum : undefined,
  }));
}

export function renderValue(spec: HyperparamSpecJson, value: unknown): string {
  switch (spec.type) {
    case "str":
    case "enum":
      return String(value);
    case "bool":
      return value ? "true" : "false";
    case "int":
    case "float":
      return String(value);
    default:
      return JSON.stringify(value);
  }
}

export type ParseOutcome = { ok: true; value: unknown } | { ok: false; message: string };

export function parseField(field: FieldSpec, raw: string): ParseOutcome {
  const { name, spec } = field;
  let value: unknown;
  switch (spec.type) {
    case "str":
    case "enum":
      value = raw;
      break;
    case "bool":
      if (raw !== "true" && raw !== "false")
        return { ok: false, message: `${name} must be true or false` };
      value = raw === "true";
      break;
    case "int": {
      if (!/^-?\d+$/.test(raw.trim()))
        return { ok: false, message: `${name} must be an integer` };
      value = Number(raw);
      break;
    }
    case "float": {
      const parsed = Number(raw.trim());
      if (raw.trim() === "" || Number.isNaN(parsed))
        return { ok: false, message: `${name} must be a number` };
      value = parsed;
      break;
    }
    default: {
      try {
        value = JSON.parse(raw);
      } catch {
        return { ok: false, message: `${name} must be valid JSON` };
      }
    }
  }
  const problem = checkValue(name, spec, value);
  return problem ? { ok: false, message: problem } : { ok: true, value };
}

// One dialog session: stage edits, expose per-field errors, commit or drop.
export class DialogState {
  readonly fields: FieldSpec[];
  private staged: Record<string, unknown>;
  readonly errors = new Map<string, string>();

  constructor(
    schema: Record<string, HyperparamSpecJson>,
    private readonly original: Record<string, unknown>,
  ) {
    this.fields = fieldsFor(schema, original);
    this.staged = structuredClone(original);
  }

  edit(name: string, raw: string): ParseOutcome {
    const field = this.fields.find((f) => f.name === name);
    if (!field) throw new Error(`no field ${name}`);
    const outcome = parseField(field, raw);
    if (outcome.ok) {
      this.errors.delete(name);
      this.staged[name] = outcome.value;
    } else {
      this.errors.set(name, outcome.message);
    }
    return outcome;
  }

  get okEnabled(): boolean {
    return this.errors.size === 0;
  }

  // OK: the staged values; Cancel: the untouched originals.
  commit(): Record<string, unknown> {
    if (!this.okEnabled) throw new Error("dialog has invalid fields");
    return structuredClone(this.staged);
  }

  cancel(): Record<string, unknown> {
    return this.original;
  }
}
