import { describe, expect, it } from "vitest";

import {
  applyQueryResult,
  cloneEvidence,
  emptyEvidence,
  EvidenceStore,
  evidenceCount,
  RequestTracker,
  sameEvidence,
} from "../src/state.js";
import type { QueryResult } from "../src/api.js";

describe("EvidenceStore", () => {
  it("toggles a state on and off", () => {
    const store = new EvidenceStore();
    expect(store.toggle("n", "s1").hard).toEqual({ n: "s1" });
    expect(store.toggle("n", "s1").hard).toEqual({});
  });

  it("switching states replaces the previous selection", () => {
    const store = new EvidenceStore();
    store.toggle("n", "s1");
    expect(store.toggle("n", "s2").hard).toEqual({ n: "s2" });
  });

  it("hard selection evicts soft evidence on the same node", () => {
    const store = new EvidenceStore();
    store.setSoft("n", [1, 0.5]);
    const snapshot = store.toggle("n", "s1");
    expect(snapshot.soft).toEqual({});
    expect(snapshot.hard).toEqual({ n: "s1" });
  });

  it("snapshots are deep copies", () => {
    const store = new EvidenceStore();
    const snapshot = store.toggle("n", "s1");
    snapshot.hard["other"] = "mutated";
    expect(store.snapshot().hard).toEqual({ n: "s1" });
  });

  it("restore brings back a previous snapshot after inconsistency", () => {
    const store = new EvidenceStore();
    const before = store.toggle("a", "x");
    store.toggle("b", "y");
    store.restore(before);
    expect(store.snapshot().hard).toEqual({ a: "x" });
  });

  it("clearAll empties everything", () => {
    const store = new EvidenceStore();
    store.toggle("a", "x");
    store.setSoft("b", [1, 2]);
    expect(evidenceCount(store.clearAll())).toBe(0);
  });
});

describe("RequestTracker", () => {
  it("only the latest request id is current", () => {
    const tracker = new RequestTracker();
    const first = tracker.next();
    const second = tracker.next();
    expect(tracker.isCurrent(first)).toBe(false);
    expect(tracker.isCurrent(second)).toBe(true);
  });

  it("a stale response never overwrites a newer answer", () => {
    // simulates: request 1 issued, request 2 issued, response 1 arrives late
    const tracker = new RequestTracker();
    let view = { marginals: null, assessment: null, answeredEvidence: null };
    const makeResult = (tag: string): QueryResult => ({
      evidence: { hard: { tag }, soft: {} } as never,
      log_evidence: 0,
      marginals: { node: { [tag]: 1 } },
      assessment: null,
    });
    const id1 = tracker.next();
    const id2 = tracker.next();
    const response2 = makeResult("current");
    if (tracker.isCurrent(id2)) view = applyQueryResult(view, response2);
    const response1 = makeResult("stale");
    if (tracker.isCurrent(id1)) view = applyQueryResult(view, response1);
    expect(view.marginals).toEqual({ node: { current: 1 } });
  });
});

describe("evidence helpers", () => {
  it("sameEvidence ignores key order", () => {
    const a = { hard: { x: "1", y: "2" }, soft: { z: [1, 2] } };
    const b = { hard: { y: "2", x: "1" }, soft: { z: [1, 2] } };
    expect(sameEvidence(a, b)).toBe(true);
    expect(sameEvidence(a, { hard: { x: "1" }, soft: {} })).toBe(false);
  });

  it("cloneEvidence is deep", () => {
    const original = { hard: { x: "1" }, soft: { z: [1, 2] } };
    const copy = cloneEvidence(original);
    copy.soft["z"]![0] = 99;
    expect(original.soft["z"]![0]).toBe(1);
  });

  it("emptyEvidence counts zero", () => {
    expect(evidenceCount(emptyEvidence())).toBe(0);
  });
});
