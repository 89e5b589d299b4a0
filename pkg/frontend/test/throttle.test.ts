import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { throttled } from "../src/throttle.js";

describe("throttled", () => {
  beforeEach(() => {
    vi.useFakeTimers({ toFake: ["setTimeout", "clearTimeout", "Date"] });
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("sends the first value immediately", () => {
    const sent: number[] = [];
    const emit = throttled((v: number) => sent.push(v), 50);
    emit(1);
    expect(sent).toEqual([1]);
  });

  it("collapses a burst to the newest value", () => {
    const sent: number[] = [];
    const emit = throttled((v: number) => sent.push(v), 50);
    emit(1);
    emit(2);
    emit(3);
    expect(sent).toEqual([1]);
    vi.advanceTimersByTime(50);
    expect(sent).toEqual([1, 3]);
  });

  it("caps a one-second drag at the rate limit and keeps the last value", () => {
    const stamps: Array<[number, number]> = [];
    const emit = throttled((v: number) => stamps.push([Date.now(), v]), 50);
    for (let i = 0; i < 100; i++) {
      emit(i);
      vi.advanceTimersByTime(10);
    }
    vi.advanceTimersByTime(100);
    expect(stamps.length).toBeGreaterThanOrEqual(1);
    expect(stamps.length).toBeLessThanOrEqual(21);
    expect(stamps[stamps.length - 1][1]).toBe(99);
    for (let i = 1; i < stamps.length; i++) {
      expect(stamps[i][0] - stamps[i - 1][0]).toBeGreaterThanOrEqual(50);
    }
  });

  it("passes a late value straight through", () => {
    const sent: number[] = [];
    const emit = throttled((v: number) => sent.push(v), 50);
    emit(1);
    vi.advanceTimersByTime(200);
    emit(2);
    expect(sent).toEqual([1, 2]);
  });
});
