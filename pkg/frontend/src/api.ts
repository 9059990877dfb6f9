// Thin typed client over the backend's REST endpoints. Every method maps
// to exactly one endpoint; polling helpers keep at most one request in
// flight per job.

import type {
  DatasetHandle,
  JobJson,
  PipelineJson,
  RegistryJson,
  ScoresCurveJson,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(body)}`);
  }
}

async function parseBody(response: Response): Promise<unknown> {
  const text = await response.text();
  try {
    return JSON.parse(text);
  } catch {
    return text;
  }
}

export interface RunRequest {
  dataset_id: string;
  pipeline: PipelineJson;
  metric?: string;
  scheme?: { kind: "kfold"; k?: number } | { kind: "holdout"; train_fraction?: number };
  seed?: number;
}

export class StudioApi {
  constructor(
    private readonly base = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await parseBody(response);
    if (!response.ok) throw new ApiError(response.status, body);
    return body;
  }

  private post(path: string, payload: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getPrimitives(): Promise<RegistryJson> {
    return this.request("/api/primitives") as Promise<RegistryJson>;
  }

  uploadDataset(file: File | Blob, name: string, targetIndex?: number): Promise<DatasetHandle> {
    const form = new FormData();
    form.append("file", file, name);
    if (targetIndex !== undefined) form.append("target_index", String(targetIndex));
    return this.request("/api/datasets", { method: "POST", body: form }) as Promise<DatasetHandle>;
  }

  validatePipeline(doc: PipelineJson): Promise<{ diagnostics: string[] }> {
    return this.post("/api/pipelines/validate", doc) as Promise<{ diagnostics: string[] }>;
  }

  async submitRun(request: RunRequest): Promise<string> {
    const body = (await this.post("/api/runs", request)) as { job_id: string };
    return body.job_id;
  }

  getRun(jobId: string): Promise<JobJson> {
    return this.request(`/api/runs/${jobId}`) as Promise<JobJson>;
  }

  getRunScores(jobId: string): Promise<ScoresCurveJson> {
    return this.request(`/api/runs/${jobId}/scores`) as Promise<ScoresCurveJson>;
  }

  async submitSearch(payload: Record<string, unknown>): Promise<string> {
    const body = (await this.post("/api/search", payload)) as { job_id: string };
    return body.job_id;
  }

  getSearch(jobId: string): Promise<JobJson> {
    return this.request(`/api/search/${jobId}`) as Promise<JobJson>;
  }

  // Poll until the job reaches a terminal state. Waits out each response
  // before asking again; onUpdate fires for every poll (for status text).
  async waitForJob(
    jobId: string,
    kind: "run" | "search",
    opts: { intervalMs?: number; onUpdate?: (job: JobJson) => void } = {},
  ): Promise<JobJson> {
    const interval = opts.intervalMs ?? 500;
    for (;;) {
      const job = await (kind === "run" ? this.getRun(jobId) : this.getSearch(jobId));
      opts.onUpdate?.(job);
      if (job.status === "succeeded" || job.status === "failed") return job;
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }
}
