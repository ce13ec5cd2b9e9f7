import { describe, expect, it } from "vitest";

import type { RatingPayload, SampleSummary } from "../src/api.js";
import {
  ReviewSession,
  adjudicationLane,
  buildQueue,
  hashString,
  mulberry32,
} from "../src/state.js";

function sample(overrides: Partial<SampleSummary> & { id: string }): SampleSummary {
  return {
    category: "patchscript",
    benchmark: "church-bell",
    benchmark_name: "A church bell",
    paired_with: "additive",
    index: 0,
    wellformed: "yes",
    node_count: 6,
    status: "needs-human",
    my_judgment: null,
    decision: null,
    partner_judgments: null,
    ...overrides,
  };
}

describe("mulberry32", () => {
  it("is deterministic for a seed", () => {
    const a = mulberry32(42);
    const b = mulberry32(42);
    expect([a(), a(), a()]).toEqual([b(), b(), b()]);
  });

  it("differs across seeds", () => {
    expect(mulberry32(1)()).not.toEqual(mulberry32(2)());
  });
});

describe("buildQueue", () => {
  const samples = [
    sample({ id: "ps:bell:0", benchmark: "church-bell" }),
    sample({ id: "ps:bell:1", benchmark: "church-bell" }),
    sample({ id: "ps:bell:2", benchmark: "church-bell" }),
    sample({ id: "ps:waves:0", benchmark: "ocean-waves" }),
    sample({ id: "ps:waves:1", benchmark: "ocean-waves" }),
    sample({ id: "ps:dial:0", benchmark: "dial-tone" }),
  ];

  it("excludes samples this rater already judged", () => {
    const judged = samples.map((s, i) =>
      i === 0 ? { ...s, my_judgment: "pass" as const } : s
    );
    const queue = buildQueue(judged, "run-1");
    expect(queue.map((s) => s.id)).not.toContain("ps:bell:0");
    expect(queue).toHaveLength(5);
  });

  it("groups by benchmark", () => {
    const queue = buildQueue(samples, "run-1");
    const benchmarks = queue.map((s) => s.benchmark);
    // grouped: all of one benchmark are contiguous
    const firstWave = benchmarks.indexOf("ocean-waves");
    const lastBell = benchmarks.lastIndexOf("church-bell");
    expect(new Set(benchmarks.slice(firstWave)).has("church-bell")).toBe(false);
    expect(lastBell).toBeLessThan(firstWave);
  });

  it("shuffle is deterministic per run id", () => {
    const a = buildQueue(samples, "run-1").map((s) => s.id);
    const b = buildQueue(samples, "run-1").map((s) => s.id);
    expect(a).toEqual(b);
  });

  it("different runs get different orders somewhere", () => {
    const many = Array.from({ length: 12 }, (_, i) =>
      sample({ id: `ps:bell:${i}`, benchmark: "church-bell", index: i })
    );
    const orders = new Set(
      ["run-1", "run-2", "run-3", "run-4"].map((run) =>
        buildQueue(many, run).map((s) => s.id).join(",")
      )
    );
    expect(orders.size).toBeGreaterThan(1);
  });
});

describe("adjudicationLane", () => {
  it("collects judged-but-pending samples with visible partner judgments", () => {
    const lane = adjudicationLane([
      sample({ id: "a", my_judgment: "pass", decision: "pending",
               partner_judgments: [{ rater_id: "bob", judgment: "fail", adjudicated: null }] }),
      sample({ id: "b" }),  // not judged by me
      sample({ id: "c", my_judgment: "pass", decision: "pass",
               partner_judgments: [{ rater_id: "bob", judgment: "pass", adjudicated: null }] }),
      sample({ id: "d", my_judgment: "pass", decision: "pending", partner_judgments: [] }),
    ]);
    expect(lane.map((s) => s.id)).toEqual(["a"]);
  });
});

describe("ReviewSession", () => {
  function fakeApi(results: Array<number | Error>) {
    const calls: Array<{ sampleId: string; payload: RatingPayload }> = [];
    const api = {
      postRating: async (sampleId: string, payload: RatingPayload) => {
        calls.push({ sampleId, payload });
        const next = results.shift() ?? 201;
        if (next instanceof Error) {
          throw next;
        }
        return { status: next, ok: next === 201 };
      },
    };
    return { api: api as never, calls };
  }

  it("blocks judgment before audio played", async () => {
    const { api } = fakeApi([201]);
    const session = new ReviewSession(api, "alice");
    await expect(session.submit("s1", "pass")).rejects.toThrow(/played/);
  });

  it("submits after playback", async () => {
    const { api, calls } = fakeApi([201]);
    const session = new ReviewSession(api, "alice");
    session.markPlayed("s1");
    expect(await session.submit("s1", "pass")).toBe("accepted");
    expect(calls[0]).toEqual({
      sampleId: "s1",
      payload: { rater_id: "alice", judgment: "pass" },
    });
  });

  it("maps 409 to duplicate", async () => {
    const { api } = fakeApi([409]);
    const session = new ReviewSession(api, "alice");
    session.markPlayed("s1");
    expect(await session.submit("s1", "pass")).toBe("duplicate");
  });

  it("queues network failures and retries them", async () => {
    const { api, calls } = fakeApi([new Error("offline"), 201]);
    const session = new ReviewSession(api, "alice");
    session.markPlayed("s1");
    expect(await session.submit("s1", "fail")).toBe("queued-retry");
    expect(session.retryQueue).toHaveLength(1);
    expect(await session.flushRetries()).toBe(1);
    expect(session.retryQueue).toHaveLength(0);
    expect(calls).toHaveLength(2);
  });

  it("adjudications post team records with the adjudicated field", async () => {
    const { api, calls } = fakeApi([201]);
    const session = new ReviewSession(api, "bob");
    expect(await session.submitAdjudication("s1", "pass", "we agreed")).toBe("accepted");
    expect(calls[0].payload.adjudicated).toBe("pass");
    expect(calls[0].payload.rater_id.startsWith("team:bob")).toBe(true);
  });
});
