/** Deterministic layered DAG layout: one column per layer in kill-chain
 * order, nodes stacked in declaration order. Pure geometry, no DOM. */

import type { NetworkSummary } from "./api.js";

export const LAYER_ORDER = [
  "capability",
  "affordance",
  "ttp",
  "defense",
  "outcome",
  "threshold",
] as const;

export interface NodeBox {
  id: string;
  label: string;
  layer: string;
  threshold: boolean;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface EdgeLine {
  parent: string;
  child: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  violating: boolean;
}

export interface GraphLayout {
  width: number;
  height: number;
  columns: { layer: string; x: number }[];
  nodes: NodeBox[];
  edges: EdgeLine[];
}

const BOX_WIDTH = 150;
const BOX_HEIGHT = 46;
const COLUMN_GAP = 48;
const ROW_GAP = 26;
const MARGIN = 24;

export function layoutGraph(
  summary: NetworkSummary,
  violatingEdges: { parent: string; child: string }[] = [],
): GraphLayout {
  const layers: string[] = [...LAYER_ORDER];
  for (const node of summary.nodes) {
    if (!layers.includes(node.layer)) layers.push(node.layer);
  }
  const columnX = new Map<string, number>();
  layers.forEach((layer, i) => {
    columnX.set(layer, MARGIN + i * (BOX_WIDTH + COLUMN_GAP));
  });
  const rowCount = new Map<string, number>();
  const boxes: NodeBox[] = [];
  const thresholds = new Set(summary.threshold_nodes);
  for (const node of summary.nodes) {
    const row = rowCount.get(node.layer) ?? 0;
    rowCount.set(node.layer, row + 1);
    boxes.push({
      id: node.id,
      label: node.label || node.id,
      layer: node.layer,
      threshold: thresholds.has(node.id),
      x: columnX.get(node.layer) ?? MARGIN,
      y: MARGIN + 20 + row * (BOX_HEIGHT + ROW_GAP),
      width: BOX_WIDTH,
      height: BOX_HEIGHT,
    });
  }
  const byId = new Map(boxes.map((b) => [b.id, b]));
  const violating = new Set(violatingEdges.map((v) => `${v.parent}->${v.child}`));
  const edges: EdgeLine[] = [];
  for (const edge of summary.edges) {
    const from = byId.get(edge.parent);
    const to = byId.get(edge.child);
    if (!from || !to) continue;
    edges.push({
      parent: edge.parent,
      child: edge.child,
      x1: from.x + from.width,
      y1: from.y + from.height / 2,
      x2: to.x,
      y2: to.y + to.height / 2,
      violating: violating.has(`${edge.parent}->${edge.child}`),
    });
  }
  const maxRows = Math.max(1, ...[...rowCount.values()]);
  return {
    width: MARGIN * 2 + layers.length * BOX_WIDTH + (layers.length - 1) * COLUMN_GAP,
    height: MARGIN * 2 + 20 + maxRows * (BOX_HEIGHT + ROW_GAP),
    columns: layers.map((layer) => ({ layer, x: columnX.get(layer) ?? 0 })),
    nodes: boxes,
    edges,
  };
}

/** SVG text for the layout; deterministic for a given network summary. */
export function renderGraphSvg(layout: GraphLayout): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `width="${layout.width}" height="${layout.height}" role="img">`,
  );
  parts.push(
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" ` +
      `markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
      `<path d="M 0 0 L 10 5 L 0 10 z" fill="#5b6472"/></marker></defs>`,
  );
  for (const col of layout.columns) {
    parts.push(
      `<text x="${col.x + BOX_WIDTH / 2}" y="${MARGIN}" class="layer-label" ` +
        `text-anchor="middle">${escapeXml(col.layer)}</text>`,
    );
  }
  for (const edge of layout.edges) {
    const cls = edge.violating ? "edge violating" : "edge";
    parts.push(
      `<line class="${cls}" x1="${edge.x1}" y1="${edge.y1}" x2="${edge.x2}" ` +
        `y2="${edge.y2}" marker-end="url(#arrow)"/>`,
    );
  }
  for (const node of layout.nodes) {
    const cls = node.threshold ? "node threshold" : "node";
    parts.push(`<g class="${cls}" data-node="${escapeXml(node.id)}">`);
    parts.push(
      `<rect x="${node.x}" y="${node.y}" width="${node.width}" height="${node.height}" rx="8"/>`,
    );
    parts.push(
      `<text x="${node.x + node.width / 2}" y="${node.y + node.height / 2 + 4}" ` +
        `text-anchor="middle">${escapeXml(truncate(node.label, 20))}</text>`,
    );
    parts.push("</g>");
  }
  parts.push("</svg>");
  return parts.join("");
}

function truncate(text: string, max: number): string {
  return text.length <= max ? text : text.slice(0, max - 1) + "…";
}

export function escapeXml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
