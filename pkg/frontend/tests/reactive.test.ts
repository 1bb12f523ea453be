/** Debounce and cancellation behavior of the reactive runner. */
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ReactiveRunner } from "../src/reactive.js";

describe("ReactiveRunner", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses a burst of schedules into one run", async () => {
    let runs = 0;
    const runner = new ReactiveRunner(async () => {
      runs += 1;
    });
    for (let i = 0; i < 8; i++) runner.schedule();
    expect(runs).toBe(0);
    await vi.advanceTimersByTimeAsync(399);
    expect(runs).toBe(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(runs).toBe(1);
  });

  it("fires once per separated change", async () => {
    let runs = 0;
    const runner = new ReactiveRunner(async () => {
      runs += 1;
    });
    runner.schedule();
    await vi.advanceTimersByTimeAsync(400);
    runner.schedule();
    await vi.advanceTimersByTimeAsync(400);
    expect(runs).toBe(2);
  });

  it("aborts a superseded in-flight run", async () => {
    const seen: AbortSignal[] = [];
    const runner = new ReactiveRunner((signal) => {
      seen.push(signal);
      return new Promise(() => undefined); // never settles
    }, 10);
    runner.schedule();
    await vi.advanceTimersByTimeAsync(10);
    runner.schedule();
    await vi.advanceTimersByTimeAsync(10);
    expect(seen.length).toBe(2);
    expect(seen[0].aborted).toBe(true);
    expect(seen[1].aborted).toBe(false);
  });

  it("cancel stops both the timer and the in-flight request", async () => {
    const seen: AbortSignal[] = [];
    let runs = 0;
    const runner = new ReactiveRunner((signal) => {
      runs += 1;
      seen.push(signal);
      return new Promise(() => undefined);
    }, 10);
    runner.schedule();
    await vi.advanceTimersByTimeAsync(10);
    runner.schedule();
    runner.cancel();
    await vi.advanceTimersByTimeAsync(50);
    expect(runs).toBe(1);
    expect(seen[0].aborted).toBe(true);
  });
});
