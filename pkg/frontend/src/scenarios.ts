/** Scenario workbench logic: named drafts of evidence, run/compare, and
 * export in the exact scenario-file format the CLI consumes. */

import type { Evidence } from "./api.js";
import { cloneEvidence } from "./state.js";

export interface ScenarioDraft {
  name: string;
  description: string;
  evidence: Evidence;
}

export class Workbench {
  private drafts: ScenarioDraft[] = [];

  list(): ScenarioDraft[] {
    return this.drafts.map((d) => ({ ...d, evidence: cloneEvidence(d.evidence) }));
  }

  /** Save a draft; duplicate names are rejected so the UI can prompt. */
  save(name: string, evidence: Evidence, description = ""): ScenarioDraft {
    const trimmed = name.trim();
    if (!trimmed) {
      throw new Error("scenario name must not be empty");
    }
    if (this.drafts.some((d) => d.name === trimmed)) {
      throw new Error(`a scenario named "${trimmed}" already exists`);
    }
    const draft = { name: trimmed, description, evidence: cloneEvidence(evidence) };
    this.drafts.push(draft);
    return draft;
  }

  remove(name: string): void {
    this.drafts = this.drafts.filter((d) => d.name !== name);
  }

  replaceAll(drafts: ScenarioDraft[]): void {
    this.drafts = drafts.map((d) => ({ ...d, evidence: cloneEvidence(d.evidence) }));
  }

  get size(): number {
    return this.drafts.length;
  }
}

/** Scenario-file object: sorted evidence keys, hard and soft always present. */
export function toScenarioFileObject(drafts: ScenarioDraft[]): {
  scenarios: {
    name: string;
    description: string;
    evidence: { hard: Record<string, string>; soft: Record<string, number[]> };
  }[];
} {
  return {
    scenarios: drafts.map((d) => ({
      name: d.name,
      description: d.description,
      evidence: {
        hard: Object.fromEntries(
          Object.keys(d.evidence.hard)
            .sort()
            .map((k) => [k, d.evidence.hard[k] as string]),
        ),
        soft: Object.fromEntries(
          Object.keys(d.evidence.soft)
            .sort()
            .map((k) => [k, [...(d.evidence.soft[k] as number[])]]),
        ),
      },
    })),
  };
}

export function exportScenarioFile(drafts: ScenarioDraft[]): string {
  return JSON.stringify(toScenarioFileObject(drafts), null, 2) + "\n";
}

/** Parse a scenario file (the CLI format) into drafts. */
export function parseScenarioFile(text: string): ScenarioDraft[] {
  const doc = JSON.parse(text) as {
    scenarios?: {
      name?: string;
      description?: string;
      evidence?: { hard?: Record<string, string>; soft?: Record<string, number[]> };
    }[];
  };
  if (!Array.isArray(doc.scenarios)) {
    throw new Error("scenario file needs a scenarios list");
  }
  return doc.scenarios.map((s, i) => {
    if (!s.name) throw new Error(`scenario ${i} has no name`);
    return {
      name: s.name,
      description: s.description ?? "",
      evidence: {
        hard: { ...(s.evidence?.hard ?? {}) },
        soft: Object.fromEntries(
          Object.entries(s.evidence?.soft ?? {}).map(([k, v]) => [k, [...v]]),
        ),
      },
    };
  });
}
