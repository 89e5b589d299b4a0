import { describe, expect, it } from "vitest";

import { Store } from "../src/store.js";
import { makeInstance, makeSolution, makeState } from "./fixtures.js";

describe("server messages", () => {
  it("applies state snapshots", () => {
    const store = new Store();
    store.applyServer(makeState(3));
    expect(store.seq).toBe(3);
    expect(store.instance?.devices.map((d) => d.id)).toEqual(["laptop", "tablet"]);
  });

  it("discards solutions older than the one on screen", () => {
    const store = new Store();
    store.applyServer(makeSolution(5, { objective: 0.5 }));
    store.applyServer(makeSolution(3, { objective: 0.9 }));
    expect(store.solution?.seq).toBe(5);
    expect(store.solution?.objective).toBe(0.5);
  });

  it("lets a same-seq rerun replace a stale result", () => {
    const store = new Store();
    store.applyServer(makeSolution(4, { stale: true }));
    store.applyServer(makeSolution(4, { stale: false }));
    expect(store.solution?.stale).toBe(false);
  });

  it("flags re-optimization while the snapshot is ahead of the solution", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    store.applyServer(makeSolution(0));
    expect(store.view().reoptimizing).toBe(false);
    store.applyServer(makeState(1));
    expect(store.view().reoptimizing).toBe(true);
    store.applyServer(makeSolution(1));
    expect(store.view().reoptimizing).toBe(false);
    store.applyServer(makeSolution(2, { stale: true }));
    expect(store.view().reoptimizing).toBe(true);
  });

  it("notifies subscribers once per applied message", () => {
    const store = new Store();
    let calls = 0;
    store.subscribe(() => calls++);
    store.applyServer(makeState(0));
    store.applyServer(makeSolution(0));
    expect(calls).toBe(2);
  });
});

describe("optimistic edits", () => {
  it("shows the pending value until the snapshot catches up", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    store.markPending(Store.key("importance", "feed", "analyst"), 0.8);
    expect(store.effectiveImportance("feed", "analyst")).toBe(0.8);
    expect(store.pendingCount()).toBe(1);

    // a state that does not include the edit keeps the marker
    store.applyServer(makeState(1));
    expect(store.pendingCount()).toBe(1);

    const caught = makeInstance();
    caught.importance[1][0] = 0.8;
    store.applyServer(makeState(2, caught));
    expect(store.pendingCount()).toBe(0);
    expect(store.effectiveImportance("feed", "analyst")).toBe(0.8);
  });

  it("reverts every pending edit when the server rejects", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    store.markPending(Store.key("device", "laptop"), false);
    store.markPending(Store.key("importance", "feed", "analyst"), 0.1);
    expect(store.effectiveEnabled("laptop")).toBe(false);

    store.applyServer({ type: "error", code: "rejected", detail: "ghost element" });
    expect(store.pendingCount()).toBe(0);
    expect(store.effectiveEnabled("laptop")).toBe(true);
    expect(store.effectiveImportance("feed", "analyst")).toBe(0.6);
    expect(store.view().notices.some((n) => n.includes("ghost element"))).toBe(true);
  });

  it("equals the snapshot whenever nothing is pending", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    store.markPending(Store.key("permission", "dashboard", "analyst"), 0);
    const caught = makeInstance();
    caught.permission[0][0] = 0;
    store.applyServer(makeState(1, caught));
    expect(store.pendingCount()).toBe(0);
    expect(store.effectivePermission("dashboard", "analyst")).toBe(0);
    expect(store.effectiveAccess("analyst", "tablet")).toBe(1);
    expect(store.effectivePin("feed", "laptop")).toBeNull();
  });

  it("tracks pin edits against the pin list", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    store.markPending(Store.key("pin", "feed", "tablet"), 1);
    expect(store.effectivePin("feed", "tablet")).toBe(1);

    const pinned = makeInstance();
    pinned.pins = [{ element: "feed", device: "tablet", forced: 1 }];
    store.applyServer(makeState(1, pinned));
    expect(store.pendingCount()).toBe(0);
    expect(store.effectivePin("feed", "tablet")).toBe(1);
  });
});

describe("device cards", () => {
  it("scales placements against the device screen", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    store.applyServer(makeSolution(0));
    const cards = store.deviceCards();
    expect(cards.map((c) => c.id)).toEqual(["laptop", "tablet"]);
    expect(cards[0].placed).toEqual([
      { id: "dashboard", area: 500_000, share: 0.5 },
    ]);
    expect(cards[1].placed[0].id).toBe("feed");
    expect(cards[1].placed[0].share).toBeCloseTo(0.5, 9);
    expect(cards[0].watchers).toEqual(["analyst"]);
  });

  it("keeps the card list on the solution until the next solve", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    store.applyServer(makeSolution(0));

    // a device joins: the snapshot moves ahead, the cards do not tear
    const grown = makeInstance();
    grown.devices.push({
      id: "phone", characteristics: { visual: 0.2, text: 0.6, touch: 0.8, mouse: 0 },
      width: 375, height: 667, enabled: true,
    });
    grown.access = [[1, 1, 1]];
    store.applyServer(makeState(1, grown));
    expect(store.deviceCards().map((c) => c.id)).toEqual(["laptop", "tablet"]);

    // a solution mentioning a device the snapshot lost renders a shell card
    const shrunk = makeInstance();
    shrunk.devices = shrunk.devices.slice(0, 1);
    shrunk.access = [[1]];
    store.applyServer(makeState(2, shrunk));
    const cards = store.deviceCards();
    expect(cards[1].id).toBe("tablet");
    expect(cards[1].device).toBeNull();
    expect(cards[1].enabled).toBe(false);
  });

  it("renders empty cards from the snapshot before the first solution", () => {
    const store = new Store();
    store.applyServer(makeState(0));
    const cards = store.deviceCards();
    expect(cards).toHaveLength(2);
    expect(cards.every((c) => c.placed.length === 0)).toBe(true);
  });
});
