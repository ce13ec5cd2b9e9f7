/**
 * Session state and queue logic, kept apart from the DOM so the rules are
 * unit-testable: deterministic queue ordering, the played-before-judging
 * gate, the adjudication lane, and local retry of failed submissions.
 */

import type { Judgment, RatingPayload, ReviewApi, SampleSummary } from "./api.js";

/** 32-bit seeded PRNG (mulberry32); good enough for shuffle determinism. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function hashString(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

function seededShuffle<T>(items: T[], seed: number): T[] {
  const random = mulberry32(seed);
  const out = [...items];
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(random() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/**
 * The review queue: samples this rater has not judged yet, grouped by
 * benchmark, randomized within each group (seeded by run id, so every
 * rater of a given run sees the same order and reloads are stable).
 */
export function buildQueue(samples: SampleSummary[], runId: string): SampleSummary[] {
  const pending = samples.filter((s) => s.my_judgment === null);
  const groups = new Map<string, SampleSummary[]>();
  for (const sample of pending) {
    const group = groups.get(sample.benchmark) ?? [];
    group.push(sample);
    groups.set(sample.benchmark, group);
  }
  const orderedBenchmarks = [...groups.keys()].sort();
  const queue: SampleSummary[] = [];
  for (const benchmark of orderedBenchmarks) {
    const members = groups.get(benchmark)!;
    members.sort((a, b) => a.id.localeCompare(b.id));
    queue.push(...seededShuffle(members, hashString(`${runId}:${benchmark}`)));
  }
  return queue;
}

/**
 * Samples that need the pair to consult: the rater has judged, the
 * partner judgment is visible, and the decision is still pending (either
 * a disagreement or an unsure in the mix).
 */
export function adjudicationLane(samples: SampleSummary[]): SampleSummary[] {
  return samples
    .filter(
      (s) =>
        s.my_judgment !== null &&
        s.partner_judgments !== null &&
        s.partner_judgments.length > 0 &&
        s.decision === "pending"
    )
    .sort((a, b) => a.id.localeCompare(b.id));
}

export interface QueuedSubmission {
  sampleId: string;
  payload: RatingPayload;
}

export type SubmitOutcome = "accepted" | "duplicate" | "queued-retry" | "rejected";

/**
 * Per-rater session: tracks which samples have had their audio played
 * (judgments are blocked until then) and retries submissions that failed
 * from a network error.
 */
export class ReviewSession {
  readonly played = new Set<string>();
  readonly retryQueue: QueuedSubmission[] = [];

  constructor(
    readonly api: ReviewApi,
    readonly raterId: string
  ) {}

  markPlayed(sampleId: string): void {
    this.played.add(sampleId);
  }

  canJudge(sampleId: string): boolean {
    return this.played.has(sampleId);
  }

  async submit(sampleId: string, judgment: Judgment): Promise<SubmitOutcome> {
    if (!this.canJudge(sampleId)) {
      throw new Error("audio must be played before judging");
    }
    return this.post(sampleId, { rater_id: this.raterId, judgment });
  }

  /** Adjudications are team records; the audio gate was already passed. */
  async submitAdjudication(
    sampleId: string,
    value: "pass" | "fail",
    note: string
  ): Promise<SubmitOutcome> {
    const teamId = `team:${this.raterId}${note ? `:${note.slice(0, 40)}` : ""}`;
    return this.post(sampleId, {
      rater_id: teamId,
      judgment: value,
      adjudicated: value,
    });
  }

  private async post(sampleId: string, payload: RatingPayload): Promise<SubmitOutcome> {
    try {
      const result = await this.api.postRating(sampleId, payload);
      if (result.ok) {
        return "accepted";
      }
      if (result.status === 409) {
        return "duplicate";
      }
      return "rejected";
    } catch {
      // network failure: keep it locally and retry later
      this.retryQueue.push({ sampleId, payload });
      return "queued-retry";
    }
  }

  async flushRetries(): Promise<number> {
    let delivered = 0;
    const pending = this.retryQueue.splice(0);
    for (const item of pending) {
      try {
        const result = await this.api.postRating(item.sampleId, item.payload);
        if (result.ok || result.status === 409) {
          delivered += 1;
        } else {
          // rejected for cause; dropping is correct, 4xx will not heal
        }
      } catch {
        this.retryQueue.push(item);
      }
    }
    return delivered;
  }
}
