/** View state: evidence selections plus the latest answers keyed to them.
 *
 * Responses carry an echo of the evidence they answered and a monotonically
 * increasing request id; anything stale is discarded, so the bars on screen
 * always correspond to the currently selected evidence. */

import type { Assessment, Evidence, QueryResult } from "./api.js";

export function emptyEvidence(): Evidence {
  return { hard: {}, soft: {} };
}

export function cloneEvidence(ev: Evidence): Evidence {
  return {
    hard: { ...ev.hard },
    soft: Object.fromEntries(Object.entries(ev.soft).map(([k, v]) => [k, [...v]])),
  };
}

export function evidenceCount(ev: Evidence): number {
  return Object.keys(ev.hard).length + Object.keys(ev.soft).length;
}

export class EvidenceStore {
  private evidence: Evidence = emptyEvidence();

  /** Select a hard state; selecting the already-active state clears it.
   * Returns the new snapshot. */
  toggle(node: string, state: string): Evidence {
    if (this.evidence.hard[node] === state) {
      delete this.evidence.hard[node];
    } else {
      this.evidence.hard[node] = state;
      delete this.evidence.soft[node];
    }
    return this.snapshot();
  }

  setSoft(node: string, weights: number[]): Evidence {
    this.evidence.soft[node] = [...weights];
    delete this.evidence.hard[node];
    return this.snapshot();
  }

  clearNode(node: string): Evidence {
    delete this.evidence.hard[node];
    delete this.evidence.soft[node];
    return this.snapshot();
  }

  clearAll(): Evidence {
    this.evidence = emptyEvidence();
    return this.snapshot();
  }

  /** Restore a previous snapshot (used when a query reports inconsistency). */
  restore(ev: Evidence): Evidence {
    this.evidence = cloneEvidence(ev);
    return this.snapshot();
  }

  selectedState(node: string): string | undefined {
    return this.evidence.hard[node];
  }

  snapshot(): Evidence {
    return cloneEvidence(this.evidence);
  }
}

/** Monotonic request counter; stale responses are dropped. */
export class RequestTracker {
  private counter = 0;

  next(): number {
    this.counter += 1;
    return this.counter;
  }

  isCurrent(id: number): boolean {
    return id === this.counter;
  }
}

export interface ViewState {
  marginals: Record<string, Record<string, number>> | null;
  assessment: Assessment | null;
  answeredEvidence: Evidence | null;
}

export function applyQueryResult(state: ViewState, result: QueryResult): ViewState {
  return {
    marginals: result.marginals,
    assessment: result.assessment,
    answeredEvidence: result.evidence,
  };
}

/** Key-by-key equality of evidence maps (order-independent). */
export function sameEvidence(a: Evidence, b: Evidence): boolean {
  const ah = Object.entries(a.hard).sort();
  const bh = Object.entries(b.hard).sort();
  if (JSON.stringify(ah) !== JSON.stringify(bh)) return false;
  const as = Object.entries(a.soft).sort();
  const bs = Object.entries(b.soft).sort();
  return JSON.stringify(as) === JSON.stringify(bs);
}
