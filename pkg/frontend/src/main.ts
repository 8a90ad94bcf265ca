/** Application wiring: load the network, render the layered graph and node
 * cards, and keep posteriors in lock-step with the selected evidence. */

import { ApiClient, ApiError, detectBase } from "./api.js";
import type { Evidence, NetworkSummary, SensitivityResult } from "./api.js";
import { layoutGraph, renderGraphSvg } from "./graph.js";
import { exportScenarioFile, Workbench } from "./scenarios.js";
import {
  applyQueryResult,
  EvidenceStore,
  evidenceCount,
  RequestTracker,
  ViewState,
} from "./state.js";
import {
  alarmBadgeHtml,
  nodeCardHtml,
  scenarioTableHtml,
  thresholdSelectHtml,
  tornadoHtml,
} from "./views.js";

const api = new ApiClient(detectBase());
const evidence = new EvidenceStore();
const queries = new RequestTracker();
const tornadoQueries = new RequestTracker();
const workbench = new Workbench();

let summary: NetworkSummary | null = null;
let view: ViewState = { marginals: null, assessment: null, answeredEvidence: null };
let violatingEdges: { parent: string; child: string }[] = [];
let tornadoTarget: { node: string; state: string } | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function banner(text: string, kind: "error" | "warn" | "" = "") {
  const box = el<HTMLDivElement>("banner");
  box.textContent = text;
  box.className = text ? `banner ${kind}` : "banner hidden";
}

function renderGraph() {
  if (!summary) return;
  const host = el<HTMLDivElement>("graph");
  if (summary.nodes.length === 0) {
    host.innerHTML = `<p class="hint">empty network — load a model to begin</p>`;
    return;
  }
  host.innerHTML = renderGraphSvg(layoutGraph(summary, violatingEdges));
}

function renderCards() {
  if (!summary) return;
  const host = el<HTMLDivElement>("cards");
  const thresholds = new Set(summary.threshold_nodes);
  host.innerHTML = summary.nodes
    .map((node) =>
      nodeCardHtml(
        node,
        view.marginals ? (view.marginals[node.id] ?? null) : null,
        evidence.selectedState(node.id),
        thresholds.has(node.id),
      ),
    )
    .join("");
  el<HTMLSpanElement>("alarm-slot").innerHTML = alarmBadgeHtml(view.assessment);
  const count = evidenceCount(evidence.snapshot());
  el<HTMLButtonElement>("clear-evidence").disabled = count === 0;
  el<HTMLSpanElement>("evidence-count").textContent =
    count === 0 ? "no evidence set" : `${count} node${count > 1 ? "s" : ""} observed`;
}

async function runQuery(snapshot: Evidence, previous: Evidence) {
  const id = queries.next();
  try {
    const result = await api.query(snapshot);
    if (!queries.isCurrent(id)) return;
    view = applyQueryResult(view, result);
    banner("");
    renderCards();
  } catch (err) {
    if (!queries.isCurrent(id)) return;
    if (err instanceof ApiError && err.code === "zero_probability_evidence") {
      evidence.restore(previous);
      banner("inconsistent evidence: that combination has probability zero", "warn");
      renderCards();
      return;
    }
    banner(describeError(err), "error");
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return "server unreachable — start it with: riskbn serve <network.json>";
}

async function refreshTornado() {
  if (!summary || !tornadoTarget) return;
  const delta = Number(el<HTMLInputElement>("delta").value);
  el<HTMLSpanElement>("delta-value").textContent = delta.toFixed(2);
  const id = tornadoQueries.next();
  try {
    const report: SensitivityResult = await api.sensitivity(
      tornadoTarget.node,
      tornadoTarget.state,
      delta,
    );
    if (!tornadoQueries.isCurrent(id)) return;
    el<HTMLDivElement>("tornado").innerHTML = tornadoHtml(report);
  } catch (err) {
    if (!tornadoQueries.isCurrent(id)) return;
    el<HTMLDivElement>("tornado").innerHTML =
      `<p class="hint">${describeError(err)}</p>`;
  }
}

function renderWorkbench() {
  const host = el<HTMLDivElement>("drafts");
  const drafts = workbench.list();
  if (drafts.length === 0) {
    host.innerHTML = `<p class="hint">no saved scenarios yet — set evidence and save it</p>`;
  } else {
    host.innerHTML = drafts
      .map(
        (d) => `
        <div class="draft">
          <span class="draft-name">${d.name}</span>
          <span class="draft-info">${evidenceCount(d.evidence)} observations</span>
          <button class="remove-draft" data-name="${d.name}">remove</button>
        </div>`,
      )
      .join("");
  }
  el<HTMLButtonElement>("run-scenarios").disabled = drafts.length === 0;
  el<HTMLButtonElement>("export-scenarios").disabled = drafts.length === 0;
}

async function runScenarioComparison() {
  if (!summary) return;
  const drafts = workbench.list();
  const body = exportScenarioFile(drafts);
  try {
    const run = await api.runScenarios(JSON.parse(body).scenarios);
    const levels =
      summary.nodes.find((n) => n.id === run.threshold_node)?.states ??
      ["Low", "Medium", "High", "Intolerable"];
    el<HTMLDivElement>("scenario-results").innerHTML = scenarioTableHtml(run, levels);
  } catch (err) {
    el<HTMLDivElement>("scenario-results").innerHTML =
      `<p class="hint">${describeError(err)}</p>`;
  }
}

function downloadScenarios() {
  const text = exportScenarioFile(workbench.list());
  const blob = new Blob([text], { type: "application/json" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = "scenarios.json";
  link.click();
  URL.revokeObjectURL(link.href);
}

function wireEvents() {
  el<HTMLDivElement>("cards").addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>(".state-row");
    if (!target) return;
    const node = target.dataset.node;
    const state = target.dataset.state;
    if (!node || !state) return;
    const previous = evidence.snapshot();
    const snapshot = evidence.toggle(node, state);
    renderCards();
    void runQuery(snapshot, previous);
  });
  el<HTMLButtonElement>("clear-evidence").addEventListener("click", () => {
    const previous = evidence.snapshot();
    const snapshot = evidence.clearAll();
    renderCards();
    void runQuery(snapshot, previous);
  });
  el<HTMLSelectElement>("tornado-target").addEventListener("change", (event) => {
    const value = (event.target as HTMLSelectElement).value;
    const [node, state] = value.split("::");
    if (node && state) {
      tornadoTarget = { node, state };
      void refreshTornado();
    }
  });
  el<HTMLInputElement>("delta").addEventListener("change", () => void refreshTornado());
  el<HTMLButtonElement>("save-scenario").addEventListener("click", () => {
    const input = el<HTMLInputElement>("scenario-name");
    try {
      workbench.save(input.value, evidence.snapshot());
      input.value = "";
      banner("");
      renderWorkbench();
    } catch (err) {
      banner((err as Error).message + " — pick another name", "warn");
    }
  });
  el<HTMLDivElement>("drafts").addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>(".remove-draft");
    if (!target?.dataset.name) return;
    workbench.remove(target.dataset.name);
    renderWorkbench();
  });
  el<HTMLButtonElement>("run-scenarios").addEventListener("click", () => {
    void runScenarioComparison();
  });
  el<HTMLButtonElement>("export-scenarios").addEventListener("click", downloadScenarios);
}

function populateTornadoTargets() {
  if (!summary) return;
  const select = el<HTMLSelectElement>("tornado-target");
  const thresholds = new Set(summary.threshold_nodes);
  const options: string[] = [];
  for (const node of summary.nodes) {
    if (!thresholds.has(node.id)) continue;
    for (const state of node.states) {
      options.push(
        `<option value="${node.id}::${state}">${node.id} = ${state}</option>`,
      );
    }
  }
  select.innerHTML = options.join("");
  const first = summary.threshold_nodes[0];
  if (first) {
    const states = summary.nodes.find((n) => n.id === first)?.states ?? [];
    const last = states[states.length - 1];
    if (last) {
      select.value = `${first}::${last}`;
      tornadoTarget = { node: first, state: last };
    }
  }
}

async function boot() {
  try {
    summary = await api.network();
  } catch (err) {
    banner(describeError(err), "error");
    return;
  }
  el<HTMLSpanElement>("model-name").textContent =
    `${summary.name} v${summary.version}`;
  el<HTMLParagraphElement>("threshold-statement").textContent =
    summary.threshold_statement;
  try {
    const validity = await api.validate();
    violatingEdges = validity.nomological.violations;
    if (violatingEdges.length > 0) {
      banner(
        `nomological check: ${violatingEdges.length} edge(s) run against the layer order`,
        "warn",
      );
    }
  } catch {
    violatingEdges = [];
  }
  renderGraph();
  populateTornadoTargets();
  wireEvents();
  renderWorkbench();
  await runQuery(evidence.snapshot(), evidence.snapshot());
  await refreshTornado();
}

void boot();
