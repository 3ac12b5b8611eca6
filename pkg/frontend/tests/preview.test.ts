import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { PREVIEW_DEBOUNCE_MS, PreviewScheduler } from "../src/preview";

type Req = number;
type Res = { req: Req };

function harness() {
  const sent: Req[] = [];
  const applied: Res[] = [];
  const resolvers: ((res: Res) => void)[] = [];
  const scheduler = new PreviewScheduler<Req, Res>(
    (req) =>
      new Promise<Res>((resolve) => {
        sent.push(req);
        resolvers.push(resolve);
      }),
    (res) => applied.push(res),
  );
  return { sent, applied, resolvers, scheduler };
}

describe("PreviewScheduler", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("debounces rapid updates to a single request", async () => {
    const { sent, scheduler } = harness();
    scheduler.update(1);
    scheduler.update(2);
    scheduler.update(3);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS - 1);
    expect(sent).toEqual([]);
    await vi.advanceTimersByTimeAsync(1);
    expect(sent).toEqual([3]); // only the latest slider state is sent
  });

  it("fires again after the debounce window", async () => {
    const { sent, scheduler } = harness();
    scheduler.update(1);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    scheduler.update(2);
    await vi.advanceTimersByTimeAsync(PREVIEW_DEBOUNCE_MS);
    expect(sent).toEqual([1, 2]);
  });

  it("discards stale responses (latest wins)", async () => {
    const { sent, applied, resolvers, scheduler } = harness();
    scheduler.updateNow(1);
    scheduler.updateNow(2);
    expect(sent).toEqual([1, 2]);
    resolvers[1]({ req: 2 }); // newest returns first
    await Promise.resolve();
    resolvers[0]({ req: 1 }); // stale response arrives late
    await Promise.resolve();
    expect(applied).toEqual([{ req: 2 }]);
  });

  it("applies in-order responses normally", async () => {
    const { applied, resolvers, scheduler } = harness();
    scheduler.updateNow(1);
    resolvers[0]({ req: 1 });
    await Promise.resolve();
    scheduler.updateNow(2);
    resolvers[1]({ req: 2 });
    await Promise.resolve();
    expect(applied).toEqual([{ req: 1 }, { req: 2 }]);
  });

  it("reports errors only for the newest in-flight request", async () => {
    const errors: unknown[] = [];
    const applied: Res[] = [];
    const rejecters: ((err: Error) => void)[] = [];
    const scheduler = new PreviewScheduler<Req, Res>(
      () => new Promise<Res>((_, reject) => rejecters.push(reject)),
      (res) => applied.push(res),
      (err) => errors.push(err),
    );
    scheduler.updateNow(1);
    scheduler.updateNow(2);
    rejecters[1](new Error("boom"));
    await Promise.resolve();
    expect(errors).toHaveLength(1);
    expect(applied).toEqual([]);
  });
});
