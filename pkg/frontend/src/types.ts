// Wire types for the tods HTTP API and the pipeline JSON file format.
// These mirror what the server actually sends; nothing here is invented
// client-side.

export type ValueKindName = "Table" | "Scores" | "Labels";

export interface HyperparamSpecJson {
  type: "int" | "float" | "str" | "bool" | "enum" | "float_list" | "rules";
  default: unknown;
  range?: [number, number];
  enum?: string[];
}

export interface PrimitiveDescriptorJson {
  id: string;
  family: string;
  produces: ValueKindName;
  // argument name -> value kind the argument expects
  arguments: Record<string, ValueKindName>;
  hyperparam_schema: Record<string, HyperparamSpecJson>;
}

export interface RegistryJson {
  families: Record<string, PrimitiveDescriptorJson[]>;
}

// Flat view of the registry for lookups by primitive id.
export type Registry = Map<string, PrimitiveDescriptorJson>;

export function flattenRegistry(doc: RegistryJson): Registry {
  const out: Registry = new Map();
  for (const members of Object.values(doc.families)) {
    for (const d of members) out.set(d.id, d);
  }
  return out;
}

// --- pipeline documents -----------------------------------------------------

export interface StepJson {
  primitive_id: string;
  hyperparams: Record<string, unknown>;
  arguments: Record<string, string>; // "inputs.0" or "steps.<k>.produce"
}

export interface PipelineJson {
  id?: string;
  schema_version: string;
  inputs: string[];
  steps: StepJson[];
  outputs: string[];
}

export const SCHEMA_VERSION = "tsods-1.0";

// --- datasets, jobs, results ------------------------------------------------

export interface DatasetHandle {
  id: string;
  name: string;
  n: number;
  feature_names: string[];
  has_labels: boolean;
}

export interface ScoresJson {
  precision: number;
  recall: number;
  f1: number;
  f1_pa: number;
}

export interface StepTraceJson {
  primitive_id: string;
  input_shapes: Record<string, number[]>;
  output_shape: number[] | null;
  wall_ms: number;
  status: "ok" | "failed";
  error?: string;
}

export interface RunResultJson {
  aggregate: number;
  metric: string;
  scores: ScoresJson;
  counts: { tp: number; fp: number; fn: number; tn: number };
  folds: ScoresJson[];
  steps: StepTraceJson[];
}

export interface JobJson {
  id: string;
  kind: "run" | "search";
  status: "queued" | "running" | "succeeded" | "failed";
  submitted_at: string;
  finished_at?: string;
  result?: RunResultJson | SearchResultJson;
  error?: string;
}

export interface SearchRecordJson {
  ordinal: number;
  pipeline_id: string;
  primitives: string[];
  status: "ok" | "failed";
  aggregate: number;
  fold_scores: number[];
  wall_s: number;
  error?: string;
}

export interface SearchResultJson {
  space_size: number;
  evaluated: number;
  best: SearchRecordJson;
  best_pipeline: PipelineJson | null; // null when every candidate failed
  leaderboard: SearchRecordJson[];
}

export interface ScoresCurveJson {
  job_id: string;
  scores: (number | null)[];
}
