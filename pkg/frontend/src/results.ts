// Pure helpers behind the results panel: metric cards, the score curve
// geometry, ground-truth shading spans, and failed-step extraction.

import type { RunResultJson, ScoresJson } from "./types";

export interface MetricCard {
  label: string;
  value: string;
  primary: boolean;
}

export function metricCards(result: RunResultJson): MetricCard[] {
  const order: (keyof ScoresJson)[] = ["precision", "recall", "f1", "f1_pa"];
  return order.map((key) => ({
    label: key,
    // verbatim backend value, only trimmed for display
    value: result.scores[key].toFixed(4),
    primary: key === result.metric,
  }));
}

// Scale scores into an SVG polyline; null / NaN points break the line so
// undefined regions render as gaps rather than interpolated ramps.
export function curvePath(
  scores: (number | null)[],
  width: number,
  height: number,
): string {
  const finite = scores.filter((s): s is number => s !== null && Number.isFinite(s));
  if (finite.length === 0) return "";
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const span = hi - lo || 1;
  const dx = scores.length > 1 ? width / (scores.length - 1) : 0;
  let path = "";
  let pen = false;
  scores.forEach((s, i) => {
    if (s === null || !Number.isFinite(s)) {
      pen = false;
      return;
    }
    const x = (i * dx).toFixed(2);
    const y = (height - ((s - lo) / span) * height).toFixed(2);
    path += `${pen ? "L" : "M"}${x},${y}`;
    pen = true;
  });
  return path;
}

// Consecutive label-1 stretches as [start, endExclusive) row spans.
export function anomalySpans(labels: number[]): [number, number][] {
  const spans: [number, number][] = [];
  let start = -1;
  labels.forEach((label, i) => {
    if (label === 1 && start < 0) start = i;
    if (label !== 1 && start >= 0) {
      spans.push([start, i]);
      start = -1;
    }
  });
  if (start >= 0) spans.push([start, labels.length]);
  return spans;
}

// A failed run reports "StepFailed: step 3 failed: ..."; pull the index out
// so the canvas can outline the matching node.
export function failedStepIndex(error: string | undefined): number | null {
  const m = /\bstep (\d+) failed\b/.exec(error ?? "");
  return m ? Number(m[1]) : null;
}
