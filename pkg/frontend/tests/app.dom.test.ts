// @vitest-environment happy-dom

import { beforeEach, describe, expect, it } from "vitest";
import { StudioApp } from "../src/app";
import type { StudioApi } from "../src/api";
import type { DatasetHandle, JobJson, ScoresCurveJson } from "../src/types";
import { loadRegistryJson, readFixture } from "./helpers";

// some DOM environments hide node's structuredClone; the app only clones JSON
if (!("structuredClone" in globalThis)) {
  (globalThis as Record<string, unknown>).structuredClone = (v: unknown) =>
    v === undefined ? v : JSON.parse(JSON.stringify(v));
}

const registryJson = loadRegistryJson();
const handle = JSON.parse(readFixture("dataset_handle.json")) as DatasetHandle;
const succeededJob = JSON.parse(readFixture("run_succeeded.json")) as JobJson;
const failedJob = JSON.parse(readFixture("run_failed.json")) as JobJson;
const curve = JSON.parse(readFixture("run_scores.json")) as ScoresCurveJson;

function stubApi(overrides: Partial<StudioApi> = {}): StudioApi {
  const base = {
    getPrimitives: async () => registryJson,
    uploadDataset: async () => handle,
    validatePipeline: async () => ({ diagnostics: [] }),
    submitRun: async () => succeededJob.id,
    getRun: async () => succeededJob,
    getRunScores: async () => curve,
    waitForJob: async () => succeededJob,
  };
  return { ...base, ...overrides } as unknown as StudioApi;
}

async function makeApp(api: StudioApi = stubApi()): Promise<StudioApp> {
  document.body.innerHTML = '<div id="app"></div>';
  const app = new StudioApp(document.getElementById("app")!, api);
  await app.init();
  return app;
}

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("palette", () => {
  it("groups every primitive by family", async () => {
    await makeApp();
    const headers = [...document.querySelectorAll(".palette-group h3")].map(
      (h) => h.textContent,
    );
    expect(headers).toEqual(Object.keys(registryJson.families));
    const items = document.querySelectorAll(".palette-item[data-primitive-id]");
    expect(items).toHaveLength(18);
    expect(document.querySelector(".dataset-chip")).not.toBeNull();
  });

  it("drops a node on double-click", async () => {
    const app = await makeApp();
    const item = document.querySelector<HTMLElement>(
      '[data-primitive-id="tods.detection.zscore"]',
    )!;
    item.dispatchEvent(new MouseEvent("dblclick", { bubbles: true }));
    expect(app.graph.nodes.size).toBe(1);
    expect(document.querySelectorAll(".canvas .node")).toHaveLength(1);
  });
});

describe("hyperparameter dialog", () => {
  it("blocks OK on invalid input and shows the reason inline", async () => {
    const app = await makeApp();
    const node = app.addNode("tods.timeseries_processing.moving_average", 50, 50);
    const overlay = app.openDialog(node);
    const input = overlay.querySelector<HTMLInputElement>('input[name="window"]')!;
    const ok = overlay.querySelector<HTMLButtonElement>("button.ok")!;
    expect(ok.disabled).toBe(false);

    input.value = "0";
    input.dispatchEvent(new Event("input", { bubbles: true }));
    expect(ok.disabled).toBe(true);
    const error = input.closest(".field-row")!.querySelector(".field-error")!;
    expect(error.textContent).toBe("window must be in [1, 10000]");

    input.value = "9";
    input.dispatchEvent(new Event("input", { bubbles: true }));
    expect(ok.disabled).toBe(false);
    expect(error.textContent).toBe("");
    ok.click();
    expect(node.hyperparams.window).toBe(9);
    expect(document.querySelector(".dialog-overlay")).toBeNull();
  });

  it("cancel leaves the node untouched", async () => {
    const app = await makeApp();
    const node = app.addNode("tods.timeseries_processing.moving_average", 50, 50);
    const overlay = app.openDialog(node);
    const input = overlay.querySelector<HTMLInputElement>('input[name="window"]')!;
    input.value = "77";
    input.dispatchEvent(new Event("input", { bubbles: true }));
    overlay.querySelector<HTMLButtonElement>("button.cancel")!.click();
    expect(node.hyperparams.window).toBe(5);
    expect(document.querySelector(".dialog-overlay")).toBeNull();
  });

  it("renders enums as dropdowns with exactly the schema options", async () => {
    const app = await makeApp();
    const node = app.addNode("tods.data_processing.impute_missing", 50, 50);
    const overlay = app.openDialog(node);
    const select = overlay.querySelector<HTMLSelectElement>('select[name="strategy"]')!;
    expect([...select.options].map((o) => o.value)).toEqual(["mean", "forward_fill", "linear"]);
    expect(select.value).toBe("linear");
  });
});

describe("import and run", () => {
  it("imports a pipeline file onto the canvas", async () => {
    const app = await makeApp();
    app.importPipelineText(readFixture("pipelines/default_iforest.json"));
    expect(document.querySelectorAll(".canvas .node")).toHaveLength(5);
    expect(document.querySelectorAll(".edges line")).toHaveLength(5);
  });

  it("shows metric cards and the shaded curve after a run", async () => {
    const app = await makeApp();
    app.importPipelineText(readFixture("pipelines/zscore_minimal.json"));
    app.dataset = handle;
    app.datasetLabels = Array.from({ length: 400 }, (_, i) => (i >= 100 && i < 104 ? 1 : 0));
    await app.handleRun();
    await flush();

    const values = [...document.querySelectorAll(".metric-value")].map((n) => n.textContent);
    expect(values).toEqual(["1.0000", "0.5000", "0.6667", "0.6667"]);
    expect(document.querySelector(".metric-card.primary .metric-label")!.textContent).toBe(
      "f1_pa",
    );
    expect(document.querySelector(".curve")).not.toBeNull();
    expect(document.querySelectorAll(".truth-span")).toHaveLength(1);
    expect(document.querySelectorAll(".trace-step")).toHaveLength(5);
    const jobLines = [...document.querySelectorAll(".job")].map((n) => n.textContent);
    expect(jobLines.some((line) => line!.includes("succeeded"))).toBe(true);
  });

  it("outlines the failed step and shows the backend error", async () => {
    // the failed fixture is a 2-step run whose step 1 (the detector) blew up
    const app = await makeApp(stubApi({ waitForJob: async () => failedJob } as Partial<StudioApi>));
    const impute = app.addNode("tods.data_processing.impute_missing", 40, 40);
    const profile = app.addNode("tods.detection.matrix_profile", 240, 40);
    app.graph.connect("__dataset__", impute.nodeId, "data");
    app.graph.connect(impute.nodeId, profile.nodeId, "data");
    app.renderGraph();
    app.dataset = handle;
    await app.handleRun();

    const failedNodes = document.querySelectorAll(".canvas .node.failed");
    expect(failedNodes).toHaveLength(1);
    expect(failedNodes[0]!.textContent).toContain("matrix_profile");
    const bannerText = document.querySelector(".banner")!.textContent!;
    expect(bannerText).toContain("WindowTooLarge");
  });

  it("refuses to run without a dataset", async () => {
    const app = await makeApp();
    app.importPipelineText(readFixture("pipelines/zscore_minimal.json"));
    await app.handleRun();
    expect(document.querySelector(".banner")!.textContent).toContain("upload a dataset first");
  });

  it("turns canvas problems into warnings, not crashes", async () => {
    const app = await makeApp();
    app.addNode("tods.detection.zscore", 40, 40); // unwired
    await app.handleRun();
    expect(document.querySelectorAll(".canvas .node.warned")).toHaveLength(1);
    expect(document.querySelector(".banner")).not.toBeNull();
  });
});

describe("validation and banners", () => {
  it("echoes server diagnostics as banners", async () => {
    const app = await makeApp(
      stubApi({
        validatePipeline: async () => ({ diagnostics: ["step 1: window must be in [1, 10000]"] }),
      } as Partial<StudioApi>),
    );
    app.importPipelineText(readFixture("pipelines/zscore_minimal.json"));
    await app.handleValidate();
    expect(document.querySelector(".banner")!.textContent).toContain(
      "step 1: window must be in [1, 10000]",
    );
  });

  it("banners are dismissible", async () => {
    const app = await makeApp();
    app.banner("boom");
    expect(document.querySelectorAll(".banner")).toHaveLength(1);
    document.querySelector<HTMLButtonElement>(".banner .dismiss")!.click();
    expect(document.querySelectorAll(".banner")).toHaveLength(0);
  });
});
