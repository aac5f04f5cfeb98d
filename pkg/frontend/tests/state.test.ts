import { describe, expect, it } from "vitest";

import { ApiClient, ConflictError } from "../src/api.js";
import { Store, polylineFromTrail, wordsRemaining } from "../src/state.js";

type Call = { path: string; init?: RequestInit };

function fakeTransport(handler: (call: Call) => { status: number; body: unknown }) {
  const calls: Call[] = [];
  const fetchImpl = (async (path: string, init?: RequestInit) => {
    const call = { path, init };
    calls.push(call);
    const { status, body } = handler(call);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }) as unknown as typeof fetch;
  return { calls, fetchImpl };
}

const SESSION = {
  id: "abc", revision: 3, created: "", updated: "", pages: 1,
  steps_done: [true, true, true, false, false, false, false, false],
};

const STEP_VIEW = { step: 2, revision: 3, done: true, pages: [] };
const GEOMETRY = {
  page: { index: 0, width: 100, height: 100 },
  ops: [], regions: [], reading_order: ["r1", "r2", "r3"], artifacts: [],
  grids: [], list_separators: [],
};

function storeWith(handler: (call: Call) => { status: number; body: unknown }) {
  const { calls, fetchImpl } = fakeTransport(handler);
  const store = new Store(new ApiClient("", fetchImpl));
  store.session = { ...SESSION };
  store.step = 2;
  store.geometries.set(0, structuredClone(GEOMETRY));
  return { store, calls };
}

describe("store commands", () => {
  it("sends expected_revision with every mutation", async () => {
    const { store, calls } = storeWith((call) => {
      if (call.init?.method === "PUT") {
        return { status: 200, body: { id: "abc", revision: 4, cascades: [] } };
      }
      if (call.path.includes("/geometry")) return { status: 200, body: GEOMETRY };
      return { status: 200, body: STEP_VIEW };
    });
    await store.moveRegionToIndex("r2", 0);
    const put = calls.find((c) => c.init?.method === "PUT")!;
    expect(put.path).toBe("/sessions/abc/steps/2");
    const body = JSON.parse(String(put.init!.body));
    expect(body.expected_revision).toBe(3);
    expect(body.payload).toEqual({ op: "move", page: 0, region: "r2", index: 0 });
    expect(store.revision).toBe(4);
  });

  it("flags a conflict on 409 and refuses further edits until reload", async () => {
    const { store } = storeWith((call) => {
      if (call.init?.method === "PUT") {
        return { status: 409, body: { error: "stale", revision: 9 } };
      }
      return { status: 200, body: STEP_VIEW };
    });
    await expect(store.demoteToArtifact("r1")).rejects.toThrow(ConflictError);
    expect(store.conflicted).toBe(true);
    await expect(store.demoteToArtifact("r1")).rejects.toThrow(/stale/);
  });

  it("moveRegionBy clamps to the sequence bounds", async () => {
    const moves: unknown[] = [];
    const { store } = storeWith((call) => {
      if (call.init?.method === "PUT") {
        moves.push(JSON.parse(String(call.init.body)).payload);
        return { status: 200, body: { id: "abc", revision: 4, cascades: [] } };
      }
      if (call.path.includes("/geometry")) return { status: 200, body: GEOMETRY };
      return { status: 200, body: STEP_VIEW };
    });
    await store.moveRegionBy("r1", -1); // already first: no call
    expect(moves).toHaveLength(0);
    await store.moveRegionBy("r1", +1);
    expect(moves[0]).toMatchObject({ op: "move", region: "r1", index: 1 });
  });

  it("createRegionFromSelection requires a selection", async () => {
    const { store } = storeWith(() => ({ status: 200, body: STEP_VIEW }));
    store.step = 1;
    await expect(store.createRegionFromSelection("heading")).rejects.toThrow(/select/);
  });

  it("table grid lines are sorted before sending", async () => {
    const puts: Record<string, unknown>[] = [];
    const { store } = storeWith((call) => {
      if (call.init?.method === "PUT") {
        puts.push(JSON.parse(String(call.init.body)).payload);
        return { status: 200, body: { id: "abc", revision: 4, cascades: [] } };
      }
      if (call.path.includes("/geometry")) return { status: 200, body: GEOMETRY };
      return { status: 200, body: STEP_VIEW };
    });
    store.step = 4;
    await store.setTableGrid("t1", [300, 100], [50, 20], "first_row");
    expect(puts[0]).toMatchObject({
      op: "set_grid", h_lines: [100, 300], v_lines: [20, 50],
    });
  });
});

describe("helpers", () => {
  it("counts words down from fifty", () => {
    expect(wordsRemaining("")).toBe(50);
    expect(wordsRemaining("one two three")).toBe(47);
    expect(wordsRemaining(Array(60).fill("w").join(" "))).toBe(-10);
  });

  it("deduplicates consecutive pointer samples", () => {
    expect(
      polylineFromTrail([[1, 1], [1, 1], [2, 2], [2, 2], [3, 1]]),
    ).toEqual([[1, 1], [2, 2], [3, 1]]);
  });
});
