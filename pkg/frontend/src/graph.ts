// The canvas model: primitives dropped as nodes, wired with edges, compiled
// to pipeline JSON. All invariants the editor promises live here, framework
// free, so they are directly testable:
//   - at most one incoming edge per node input (reconnecting replaces),
//   - an edge that would close a cycle is rejected,
//   - an edge whose value kind does not fit the argument is rejected,
//   - compile() warns (MultipleSinks / DisconnectedNode) instead of crashing.

import { defaultsFor } from "./hyperparams";
import { derivePipelineId, REF_INPUT, parseRef, stepRef } from "./pipeline";
import type { PipelineJson, Registry, StepJson, ValueKindName } from "./types";
import { SCHEMA_VERSION } from "./types";

// The dataset chip on the canvas; behaves like a node that produces Table.
export const DATASET = "__dataset__";

export interface CanvasNode {
  nodeId: string;
  primitiveId: string;
  x: number;
  y: number;
  hyperparams: Record<string, unknown>;
}

export interface CanvasEdge {
  from: string; // node id or DATASET
  to: string;
  input: string; // argument name on the target
}

export interface CompileWarning {
  code: "EmptyCanvas" | "MultipleSinks" | "DisconnectedNode" | "BadOutputKind";
  message: string;
  nodeIds: string[];
}

export type ConnectResult = { ok: true } | { ok: false; reason: string };

export class CanvasGraph {
  readonly nodes = new Map<string, CanvasNode>(); // insertion ordered
  edges: CanvasEdge[] = [];
  private counter = 0;

  constructor(private registry: Registry) {}

  addNode(primitiveId: string, x = 60, y = 60): CanvasNode {
    const descriptor = this.registry.get(primitiveId);
    if (!descriptor) throw new Error(`unknown primitive ${primitiveId}`);
    const node: CanvasNode = {
      nodeId: `n${this.counter++}`,
      primitiveId,
      x,
      y,
      hyperparams: defaultsFor(descriptor.hyperparam_schema),
    };
    this.nodes.set(node.nodeId, node);
    return node;
  }

  removeNode(nodeId: string): void {
    this.nodes.delete(nodeId);
    this.edges = this.edges.filter((e) => e.from !== nodeId && e.to !== nodeId);
  }

  producedKind(source: string): ValueKindName {
    if (source === DATASET) return "Table";
    const node = this.nodes.get(source);
    if (!node) throw new Error(`unknown node ${source}`);
    return this.registry.get(node.primitiveId)!.produces;
  }

  // every node reachable by following edges downstream from `start`
  private reachableFrom(start: string): Set<string> {
    const seen = new Set<string>([start]);
    const queue = [start];
    while (queue.length) {
      const current = queue.pop()!;
      for (const edge of this.edges) {
        if (edge.from === current && !seen.has(edge.to)) {
          seen.add(edge.to);
          queue.push(edge.to);
        }
      }
    }
    return seen;
  }

  connect(from: string, to: string, input: string): ConnectResult {
    const target = this.nodes.get(to);
    if (!target) return { ok: false, reason: `unknown node ${to}` };
    if (from !== DATASET && !this.nodes.has(from))
      return { ok: false, reason: `unknown node ${from}` };
    const descriptor = this.registry.get(target.primitiveId)!;
    const expected = descriptor.arguments[input];
    if (!expected)
      return { ok: false, reason: `${target.primitiveId} has no input '${input}'` };
    if (from === to) return { ok: false, reason: "a node cannot feed itself" };
    if (from !== DATASET && this.reachableFrom(to).has(from))
      return { ok: false, reason: "connection would close a cycle" };
    const produced = this.producedKind(from);
    if (produced !== expected)
      return {
        ok: false,
        reason: `input '${input}' expects ${expected}, got ${produced}`,
      };
    // one incoming edge per input: rewiring replaces the old edge
    this.edges = this.edges.filter((e) => !(e.to === to && e.input === input));
    this.edges.push({ from, to, input });
    return { ok: true };
  }

  disconnect(to: string, input: string): void {
    this.edges = this.edges.filter((e) => !(e.to === to && e.input === input));
  }

  // Kahn's algorithm preferring insertion order, so an imported pipeline
  // compiles back with its original step order.
  topoOrder(): CanvasNode[] {
    const placed = new Set<string>([DATASET]);
    const order: CanvasNode[] = [];
    const pending = [...this.nodes.values()];
    while (pending.length) {
      const index = pending.findIndex((node) =>
        this.edges
          .filter((e) => e.to === node.nodeId)
          .every((e) => placed.has(e.from)),
      );
      if (index < 0) throw new Error("cycle on canvas"); // connect() prevents this
      const node = pending.splice(index, 1)[0]!;
      placed.add(node.nodeId);
      order.push(node);
    }
    return order;
  }

  sinks(): CanvasNode[] {
    const consumed = new Set(this.edges.map((e) => e.from));
    return [...this.nodes.values()].filter((n) => !consumed.has(n.nodeId));
  }

  compile(): { doc: PipelineJson | null; warnings: CompileWarning[] } {
    const warnings: CompileWarning[] = [];
    if (this.nodes.size === 0) {
      warnings.push({ code: "EmptyCanvas", message: "drop a primitive to start", nodeIds: [] });
      return { doc: null, warnings };
    }

    for (const node of this.nodes.values()) {
      const descriptor = this.registry.get(node.primitiveId)!;
      const missing = Object.keys(descriptor.arguments).filter(
        (input) => !this.edges.some((e) => e.to === node.nodeId && e.input === input),
      );
      if (missing.length)
        warnings.push({
          code: "DisconnectedNode",
          message: `${node.primitiveId} is missing input '${missing.join("', '")}'`,
          nodeIds: [node.nodeId],
        });
    }

    const sinks = this.sinks();
    if (sinks.length > 1)
      warnings.push({
        code: "MultipleSinks",
        message: `pipeline must end in one step, found ${sinks.length} loose ends`,
        nodeIds: sinks.map((n) => n.nodeId),
      });
    const sink = sinks[0];
    if (sink) {
      const kind = this.registry.get(sink.primitiveId)!.produces;
      if (kind === "Table")
        warnings.push({
          code: "BadOutputKind",
          message: `output must produce Scores or Labels, ${sink.primitiveId} produces Table`,
          nodeIds: [sink.nodeId],
        });
    }
    if (warnings.length) return { doc: null, warnings };

    const order = this.topoOrder();
    const indexOf = new Map(order.map((node, i) => [node.nodeId, i]));
    const steps: StepJson[] = order.map((node) => {
      const args: Record<string, string> = {};
      for (const edge of this.edges) {
        if (edge.to !== node.nodeId) continue;
        args[edge.input] =
          edge.from === DATASET ? REF_INPUT : stepRef(indexOf.get(edge.from)!);
      }
      return {
        primitive_id: node.primitiveId,
        hyperparams: structuredClone(node.hyperparams),
        arguments: args,
      };
    });
    const output = stepRef(indexOf.get(sink!.nodeId)!);
    return {
      doc: {
        id: derivePipelineId(steps, output, this.registry),
        schema_version: SCHEMA_VERSION,
        inputs: ["dataset"],
        steps,
        outputs: [output],
      },
      warnings,
    };
  }
}

// Lay an imported pipeline file onto a fresh canvas, one node per step,
// positions chained left to right (positions are cosmetic and never leave
// the browser).
export function graphFromPipeline(doc: PipelineJson, registry: Registry): CanvasGraph {
  const graph = new CanvasGraph(registry);
  const byStep: CanvasNode[] = [];
  doc.steps.forEach((step, i) => {
    const node = graph.addNode(step.primitive_id, 40 + i * 180, 80 + (i % 2) * 90);
    node.hyperparams = {
      ...defaultsFor(registry.get(step.primitive_id)!.hyperparam_schema),
      ...structuredClone(step.hyperparams),
    };
    byStep.push(node);
  });
  doc.steps.forEach((step, i) => {
    for (const [input, ref] of Object.entries(step.arguments)) {
      const sourceStep = parseRef(ref);
      const from = sourceStep < 0 ? DATASET : byStep[sourceStep]!.nodeId;
      const result = graph.connect(from, byStep[i]!.nodeId, input);
      if (!result.ok) throw new Error(`step ${i}: ${result.reason}`);
    }
  });
  return graph;
}
