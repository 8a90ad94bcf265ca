/** HTML fragments for the probability panels. Values shown are exactly the
 * API numbers after half-even 3-decimal rounding. */

import type {
  Assessment,
  NetworkSummary,
  ScenarioRunResult,
  SensitivityResult,
} from "./api.js";
import { barWidthPct, formatProb } from "./format.js";
import { escapeXml } from "./graph.js";

const RISK_CLASSES: Record<string, string> = {
  Low: "risk-low",
  Medium: "risk-medium",
  High: "risk-high",
  Intolerable: "risk-intolerable",
};

export function nodeCardHtml(
  node: { id: string; label: string; states: string[]; layer: string },
  marginal: Record<string, number> | null,
  selected: string | undefined,
  isThreshold: boolean,
): string {
  const rows = node.states
    .map((state) => {
      const p = marginal ? (marginal[state] ?? 0) : 0;
      const active = selected === state ? " active" : "";
      const riskCls = isThreshold ? (RISK_CLASSES[state] ?? "") : "";
      return `
        <button class="state-row${active}" data-node="${escapeXml(node.id)}"
                data-state="${escapeXml(state)}" title="toggle evidence">
          <span class="state-name">${escapeXml(state)}</span>
          <span class="bar-track"><span class="bar-fill ${riskCls}"
                style="width:${marginal ? barWidthPct(p) : "0%"}"></span></span>
          <span class="state-prob">${marginal ? formatProb(p) : "–"}</span>
        </button>`;
    })
    .join("");
  return `
    <article class="node-card${isThreshold ? " threshold-card" : ""}" data-node="${escapeXml(node.id)}">
      <header>
        <span class="node-title">${escapeXml(node.label || node.id)}</span>
        <span class="layer-tag">${escapeXml(node.layer)}</span>
      </header>
      ${rows}
    </article>`;
}

export function alarmBadgeHtml(assessment: Assessment | null): string {
  if (!assessment) return "";
  const rule = assessment.alarm_rule;
  const cls = assessment.alarm ? "alarm on" : "alarm off";
  const text = assessment.alarm ? "ALARM" : "below alarm cutoff";
  return `<span class="${cls}"
    title="alarm when P(${escapeXml(rule.state)}) >= ${rule.cutoff}">${text}</span>`;
}

export function tornadoHtml(report: SensitivityResult): string {
  if (report.entries.length === 0) {
    return `<p class="hint">no root nodes to perturb</p>`;
  }
  const lo = Math.min(...report.entries.map((e) => Math.min(e.low, e.high)), report.baseline);
  const hi = Math.max(...report.entries.map((e) => Math.max(e.low, e.high)), report.baseline);
  const span = Math.max(hi - lo, 1e-9);
  const pct = (x: number) => `${(((x - lo) / span) * 100).toFixed(2)}%`;
  const rows = report.entries
    .map((e) => {
      const left = Math.min(e.low, e.high);
      const width = Math.abs(e.high - e.low);
      return `
      <div class="tornado-row">
        <span class="tornado-label">${escapeXml(e.source)} = ${escapeXml(e.state)}</span>
        <span class="tornado-track">
          <span class="tornado-bar" style="left:${pct(left)};width:${pct(lo + width)}"></span>
          <span class="tornado-baseline" style="left:${pct(report.baseline)}"></span>
        </span>
        <span class="tornado-range">${formatProb(e.range)}</span>
      </div>`;
    })
    .join("");
  return `
    <p class="hint">P(${escapeXml(report.target.node)} = ${escapeXml(report.target.state)}),
       baseline ${formatProb(report.baseline)}, delta ${report.delta}</p>
    ${rows}`;
}

export function scenarioTableHtml(run: ScenarioRunResult, levels: string[]): string {
  const header = levels.map((l) => `<th>${escapeXml(l)}</th>`).join("");
  const rows = run.results
    .map((row) => {
      if (row.status !== "ok" || !row.assessment) {
        return `<tr class="inconsistent"><td>${escapeXml(row.name)}</td>
          <td colspan="${levels.length + 1}">inconsistent evidence</td></tr>`;
      }
      const cells = levels
        .map((l) => `<td>${formatProb(row.assessment!.posterior[l] ?? 0)}</td>`)
        .join("");
      const alarm = row.assessment.alarm ? "ALARM" : "ok";
      return `<tr><td>${escapeXml(row.name)}</td>${cells}<td>${alarm}</td></tr>`;
    })
    .join("");
  return `
    <table class="scenario-table">
      <thead><tr><th>scenario</th>${header}<th>alarm</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

export function thresholdSelectHtml(summary: NetworkSummary, current: string): string {
  return summary.threshold_nodes
    .map(
      (t) =>
        `<option value="${escapeXml(t)}"${t === current ? " selected" : ""}>${escapeXml(t)}</option>`,
    )
    .join("");
}
