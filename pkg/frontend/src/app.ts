// The studio itself: palette on the left, canvas in the middle, inspector
// and results on the right. All domain logic is delegated to the pure
// modules (graph, forms, validate, pipeline, results); this file only
// builds DOM and routes events.

import { ApiError, StudioApi } from "./api";
import { labelColumn } from "./csv";
import { DialogState } from "./forms";
import { CanvasGraph, DATASET, graphFromPipeline, type CanvasNode } from "./graph";
import { parsePipeline, serializePipeline } from "./pipeline";
import { anomalySpans, curvePath, failedStepIndex, metricCards } from "./results";
import type {
  DatasetHandle,
  JobJson,
  PipelineJson,
  PrimitiveDescriptorJson,
  Registry,
  RegistryJson,
  RunResultJson,
} from "./types";
import { flattenRegistry } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function shortName(primitiveId: string): string {
  return primitiveId.split(".").pop() ?? primitiveId;
}

function familyClass(family: string): string {
  return "family-" + family.toLowerCase();
}

export class StudioApp {
  registry: Registry = new Map();
  registryDoc: RegistryJson = { families: {} };
  graph!: CanvasGraph;
  dataset: DatasetHandle | null = null;
  datasetLabels: number[] | null = null;
  jobs: { id: string; kind: "run" | "search"; status: string }[] = [];
  // port-click connection state: the source waiting for a target input
  private pendingSource: string | null = null;

  private palette!: HTMLElement;
  private canvas!: HTMLElement;
  private edgeLayer!: SVGSVGElement;
  private sidebar!: HTMLElement;
  private resultsPanel!: HTMLElement;
  private statusLine!: HTMLElement;
  private banners!: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    readonly api: StudioApi,
  ) {}

  async init(): Promise<void> {
    this.registryDoc = await this.api.getPrimitives();
    this.registry = flattenRegistry(this.registryDoc);
    this.graph = new CanvasGraph(this.registry);
    this.buildLayout();
    this.renderPalette();
    this.renderGraph();
  }

  // --- layout ---------------------------------------------------------------

  private buildLayout(): void {
    this.root.innerHTML = "";
    this.banners = el("div", "banners");
    const columns = el("div", "columns");
    this.palette = el("aside", "palette");
    const middle = el("main", "middle");
    this.canvas = el("div", "canvas");
    this.edgeLayer = document.createElementNS(SVG_NS, "svg");
    this.edgeLayer.classList.add("edges");
    this.canvas.append(this.edgeLayer);
    this.statusLine = el("div", "status");
    middle.append(this.buildToolbar(), this.canvas, this.statusLine);
    const right = el("aside", "right");
    this.resultsPanel = el("div", "results");
    this.sidebar = el("div", "jobs");
    right.append(this.resultsPanel, this.sidebar);
    columns.append(this.palette, middle, right);
    this.root.append(this.banners, columns);
  }

  private buildToolbar(): HTMLElement {
    const bar = el("div", "toolbar");

    const upload = el("input") as HTMLInputElement;
    upload.type = "file";
    upload.accept = ".csv";
    upload.addEventListener("change", () => {
      const file = upload.files?.[0];
      if (file) void this.handleUpload(file);
    });

    const target = el("input", "target-index") as HTMLInputElement;
    target.type = "number";
    target.placeholder = "label col";
    target.title = "0-based index of the label column, if any";
    this.targetInput = target;

    const validate = el("button", "", "Validate");
    validate.addEventListener("click", () => void this.handleValidate());
    const run = el("button", "run-button", "Run");
    run.addEventListener("click", () => void this.handleRun());
    const exportBtn = el("button", "", "Export");
    exportBtn.addEventListener("click", () => this.handleExport());

    const importInput = el("input") as HTMLInputElement;
    importInput.type = "file";
    importInput.accept = ".json";
    importInput.style.display = "none";
    importInput.addEventListener("change", () => {
      const file = importInput.files?.[0];
      if (file) void this.handleImport(file);
    });
    const importBtn = el("button", "", "Import");
    importBtn.addEventListener("click", () => importInput.click());

    this.metricSelect = el("select") as HTMLSelectElement;
    for (const metric of ["f1", "f1_pa", "precision", "recall"]) {
      const option = el("option", "", metric) as HTMLOptionElement;
      option.value = metric;
      this.metricSelect.append(option);
    }
    this.metricSelect.value = "f1_pa";

    bar.append(upload, target, this.metricSelect, validate, run, exportBtn, importBtn, importInput);
    return bar;
  }

  private targetInput!: HTMLInputElement;
  private metricSelect!: HTMLSelectElement;

  // --- palette --------------------------------------------------------------

  renderPalette(): void {
    this.palette.innerHTML = "";
    const chip = el("div", "palette-item dataset-chip", "dataset");
    chip.title = "the uploaded series; source of every pipeline";
    this.palette.append(chip);
    for (const [family, members] of Object.entries(this.registryDoc.families)) {
      const group = el("div", "palette-group");
      group.append(el("h3", "", family));
      for (const descriptor of members) {
        group.append(this.paletteItem(descriptor));
      }
      this.palette.append(group);
    }
  }

  private paletteItem(descriptor: PrimitiveDescriptorJson): HTMLElement {
    const item = el("div", `palette-item ${familyClass(descriptor.family)}`, shortName(descriptor.id));
    item.title = descriptor.id;
    item.draggable = true;
    item.dataset.primitiveId = descriptor.id;
    item.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData("text/primitive-id", descriptor.id);
    });
    // click-to-add fallback; also what the tests drive
    item.addEventListener("dblclick", () => {
      this.addNode(descriptor.id, 60 + this.graph.nodes.size * 30, 60);
    });
    return item;
  }

  // --- canvas ---------------------------------------------------------------

  addNode(primitiveId: string, x: number, y: number): CanvasNode {
    const node = this.graph.addNode(primitiveId, x, y);
    this.renderGraph();
    return node;
  }

  renderGraph(): void {
    for (const stale of this.canvas.querySelectorAll(".node")) stale.remove();
    for (const node of this.graph.nodes.values()) {
      this.canvas.append(this.nodeElement(node));
    }
    this.renderEdges();
  }

  private nodeElement(node: CanvasNode): HTMLElement {
    const descriptor = this.registry.get(node.primitiveId)!;
    const box = el("div", `node ${familyClass(descriptor.family)}`);
    box.dataset.nodeId = node.nodeId;
    box.style.left = `${node.x}px`;
    box.style.top = `${node.y}px`;

    const title = el("div", "node-title", shortName(node.primitiveId));
    title.title = node.primitiveId;
    box.append(title);

    const ports = el("div", "ports");
    for (const [input, kind] of Object.entries(descriptor.arguments)) {
      const port = el("span", "port in-port", input);
      port.title = `${input}: ${kind}`;
      port.dataset.input = input;
      port.addEventListener("click", () => this.completeConnection(node.nodeId, input));
      ports.append(port);
    }
    const out = el("span", "port out-port", descriptor.produces);
    out.addEventListener("click", () => {
      this.pendingSource = node.nodeId;
      this.setStatus(`connecting from ${shortName(node.primitiveId)}...`);
    });
    ports.append(out);
    box.append(ports);

    box.addEventListener("dblclick", (event) => {
      if ((event.target as HTMLElement).classList.contains("port")) return;
      this.openDialog(node);
    });
    this.makeDraggable(box, node);
    return box;
  }

  private makeDraggable(box: HTMLElement, node: CanvasNode): void {
    box.addEventListener("mousedown", (down) => {
      if ((down.target as HTMLElement).classList.contains("port")) return;
      const offsetX = down.clientX - node.x;
      const offsetY = down.clientY - node.y;
      const move = (event: MouseEvent) => {
        node.x = Math.max(0, event.clientX - offsetX);
        node.y = Math.max(0, event.clientY - offsetY);
        box.style.left = `${node.x}px`;
        box.style.top = `${node.y}px`;
        this.renderEdges();
      };
      const up = () => {
        window.removeEventListener("mousemove", move);
        window.removeEventListener("mouseup", up);
      };
      window.addEventListener("mousemove", move);
      window.addEventListener("mouseup", up);
    });
  }

  connectFromDataset(): void {
    this.pendingSource = DATASET;
    this.setStatus("connecting from dataset...");
  }

  private completeConnection(to: string, input: string): void {
    if (this.pendingSource === null) return;
    const result = this.graph.connect(this.pendingSource, to, input);
    if (!result.ok) this.banner(result.reason);
    this.pendingSource = null;
    this.setStatus("");
    this.renderGraph();
  }

  private renderEdges(): void {
    this.edgeLayer.innerHTML = "";
    for (const edge of this.graph.edges) {
      const from = edge.from === DATASET ? { x: 0, y: 20 } : this.graph.nodes.get(edge.from)!;
      const to = this.graph.nodes.get(edge.to)!;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(from.x + 140));
      line.setAttribute("y1", String(from.y + 24));
      line.setAttribute("x2", String(to.x));
      line.setAttribute("y2", String(to.y + 24));
      line.classList.add("edge");
      this.edgeLayer.append(line);
    }
  }

  // --- hyperparameter dialog ------------------------------------------------

  openDialog(node: CanvasNode): HTMLElement {
    const descriptor = this.registry.get(node.primitiveId)!;
    const state = new DialogState(descriptor.hyperparam_schema, node.hyperparams);
    const overlay = el("div", "dialog-overlay");
    const dialog = el("div", "dialog");
    dialog.append(el("h3", "", shortName(node.primitiveId)));

    const okButton = el("button", "ok", "OK") as HTMLButtonElement;
    const refresh = () => {
      okButton.disabled = !state.okEnabled;
    };

    for (const field of state.fields) {
      const row = el("label", "field-row");
      row.append(el("span", "field-name", field.name));
      const error = el("span", "field-error");
      let inputEl: HTMLInputElement | HTMLSelectElement;
      if (field.options) {
        const select = el("select") as HTMLSelectElement;
        for (const option of field.options) {
          const opt = el("option", "", option) as HTMLOptionElement;
          opt.value = option;
          select.append(opt);
        }
        select.value = field.initial;
        inputEl = select;
      } else {
        const input = el("input") as HTMLInputElement;
        input.value = field.initial;
        inputEl = input;
      }
      inputEl.name = field.name;
      inputEl.addEventListener("input", () => {
        const outcome = state.edit(field.name, inputEl.value);
        error.textContent = outcome.ok ? "" : outcome.message;
        refresh();
      });
      row.append(inputEl, error);
      dialog.append(row);
    }

    const buttons = el("div", "dialog-buttons");
    const cancelButton = el("button", "cancel", "Cancel");
    okButton.addEventListener("click", () => {
      node.hyperparams = state.commit();
      overlay.remove();
    });
    cancelButton.addEventListener("click", () => {
      node.hyperparams = state.cancel();
      overlay.remove();
    });
    buttons.append(okButton, cancelButton);
    dialog.append(buttons);
    overlay.append(dialog);
    this.root.append(overlay);
    refresh();
    return overlay;
  }

  // --- toolbar actions ------------------------------------------------------

  async handleUpload(file: File): Promise<void> {
    const raw = this.targetInput.value.trim();
    const targetIndex = raw === "" ? undefined : Number(raw);
    try {
      this.dataset = await this.api.uploadDataset(file, file.name, targetIndex);
      this.datasetLabels =
        targetIndex !== undefined ? labelColumn(await file.text(), targetIndex) : null;
      this.setStatus(`dataset ${this.dataset.name}: ${this.dataset.n} rows`);
    } catch (error) {
      this.showError(error);
    }
  }

  compileOrWarn(): PipelineJson | null {
    const { doc, warnings } = this.graph.compile();
    for (const warning of warnings) this.banner(warning.message);
    for (const box of this.canvas.querySelectorAll(".node.warned")) box.classList.remove("warned");
    for (const warning of warnings) {
      for (const nodeId of warning.nodeIds) {
        this.canvas.querySelector(`[data-node-id="${nodeId}"]`)?.classList.add("warned");
      }
    }
    return doc;
  }

  async handleValidate(): Promise<void> {
    const doc = this.compileOrWarn();
    if (!doc) return;
    try {
      const { diagnostics } = await this.api.validatePipeline(doc);
      this.setStatus(diagnostics.length === 0 ? "pipeline is valid" : "");
      for (const diagnostic of diagnostics) this.banner(diagnostic);
    } catch (error) {
      this.showError(error);
    }
  }

  async handleRun(): Promise<void> {
    const doc = this.compileOrWarn();
    if (!doc) return;
    if (!this.dataset) {
      this.banner("upload a dataset first");
      return;
    }
    try {
      const jobId = await this.api.submitRun({
        dataset_id: this.dataset.id,
        pipeline: doc,
        metric: this.metricSelect.value,
      });
      this.trackJob(jobId, "run");
      const job = await this.api.waitForJob(jobId, "run", {
        onUpdate: (update) => this.updateJob(jobId, update.status),
      });
      this.showRunOutcome(job, doc);
    } catch (error) {
      this.showError(error);
    }
  }

  handleExport(): void {
    const doc = this.compileOrWarn();
    if (!doc) return;
    const text = serializePipeline(doc, this.registry);
    const blob = new Blob([text], { type: "application/json" });
    const link = el("a") as HTMLAnchorElement;
    link.href = URL.createObjectURL(blob);
    link.download = `${doc.id ?? "pipeline"}.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  }

  async handleImport(file: File): Promise<void> {
    try {
      this.importPipelineText(await file.text());
    } catch (error) {
      this.showError(error);
    }
  }

  importPipelineText(text: string): void {
    const doc = parsePipeline(text);
    this.graph = graphFromPipeline(doc, this.registry);
    this.renderGraph();
  }

  // --- results --------------------------------------------------------------

  showRunOutcome(job: JobJson, doc: PipelineJson): void {
    this.updateJob(job.id, job.status);
    for (const box of this.canvas.querySelectorAll(".node.failed")) box.classList.remove("failed");
    if (job.status === "failed") {
      const failed = failedStepIndex(job.error);
      if (failed !== null) this.highlightStep(failed, doc);
      this.banner(job.error ?? "run failed");
      return;
    }
    void this.renderResults(job);
  }

  private highlightStep(stepIndex: number, doc: PipelineJson): void {
    // compile() emits steps in topoOrder(), so step k is the k-th node there
    const node = this.graph.topoOrder()[stepIndex];
    if (!node) return;
    this.canvas.querySelector(`[data-node-id="${node.nodeId}"]`)?.classList.add("failed");
  }

  private async renderResults(job: JobJson): Promise<void> {
    const result = job.result as RunResultJson;
    this.resultsPanel.innerHTML = "";
    const cards = el("div", "metric-cards");
    for (const card of metricCards(result)) {
      const cardEl = el("div", card.primary ? "metric-card primary" : "metric-card");
      cardEl.append(el("div", "metric-label", card.label), el("div", "metric-value", card.value));
      cards.append(cardEl);
    }
    this.resultsPanel.append(cards);
    this.resultsPanel.append(
      el("div", "aggregate", `aggregate ${result.metric}: ${result.aggregate.toFixed(4)}`),
    );

    try {
      const curve = await this.api.getRunScores(job.id);
      this.resultsPanel.append(this.curveSvg(curve.scores));
    } catch {
      // scores are optional display sugar; the cards already rendered
    }

    const trace = el("ul", "trace");
    for (const step of result.steps) {
      const item = el(
        "li",
        step.status === "ok" ? "trace-step" : "trace-step failed",
        `${shortName(step.primitive_id)} ${step.wall_ms.toFixed(1)}ms`,
      );
      trace.append(item);
    }
    this.resultsPanel.append(trace);
  }

  private curveSvg(scores: (number | null)[]): SVGSVGElement {
    const width = 360;
    const height = 120;
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.classList.add("curve");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    if (this.datasetLabels) {
      const dx = scores.length > 1 ? width / (scores.length - 1) : 0;
      for (const [start, end] of anomalySpans(this.datasetLabels)) {
        const rect = document.createElementNS(SVG_NS, "rect");
        rect.classList.add("truth-span");
        rect.setAttribute("x", String(start * dx));
        rect.setAttribute("width", String(Math.max((end - start) * dx, 1.5)));
        rect.setAttribute("y", "0");
        rect.setAttribute("height", String(height));
        svg.append(rect);
      }
    }
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute("d", curvePath(scores, width, height));
    path.classList.add("curve-line");
    svg.append(path);
    return svg;
  }

  // --- jobs sidebar, status, banners ---------------------------------------

  private trackJob(id: string, kind: "run" | "search"): void {
    this.jobs.push({ id, kind, status: "queued" });
    this.renderJobs();
  }

  private updateJob(id: string, status: string): void {
    const job = this.jobs.find((j) => j.id === id);
    if (job) job.status = status;
    this.renderJobs();
  }

  private renderJobs(): void {
    this.sidebar.innerHTML = "";
    this.sidebar.append(el("h3", "", "jobs"));
    for (const job of [...this.jobs].reverse()) {
      this.sidebar.append(
        el("div", `job job-${job.status}`, `${job.kind} ${job.id.slice(0, 8)}: ${job.status}`),
      );
    }
  }

  setStatus(text: string): void {
    this.statusLine.textContent = text;
  }

  banner(message: string): HTMLElement {
    const banner = el("div", "banner");
    banner.append(el("span", "", message));
    const dismiss = el("button", "dismiss", "x");
    dismiss.addEventListener("click", () => banner.remove());
    banner.append(dismiss);
    this.banners.append(banner);
    return banner;
  }

  private showError(error: unknown): void {
    if (error instanceof ApiError) {
      this.banner(`HTTP ${error.status}: ${JSON.stringify(error.body)}`);
    } else {
      this.banner(String(error));
    }
  }
}

export function boot(root: HTMLElement): StudioApp {
  const app = new StudioApp(root, new StudioApi());
  void app.init();
  return app;
}
