/**
 * Typed client for the review service. The UI talks to nothing else:
 * verdict truth lives server-side and this client only reads state and
 * posts RatingRecords.
 */

export type Judgment = "pass" | "fail" | "unsure";

export interface PartnerJudgment {
  rater_id: string;
  judgment: Judgment;
  adjudicated: string | null;
}

export interface SampleSummary {
  id: string;
  category: string;
  benchmark: string;
  benchmark_name: string;
  paired_with: string;
  index: number;
  wellformed: string;
  node_count: number | null;
  status: string | null;
  my_judgment: Judgment | null;
  decision: string | null;
  /** null until the requesting rater has submitted their own judgment */
  partner_judgments: PartnerJudgment[] | null;
}

export interface PatchNode {
  id: string;
  type: string;
  params: (number | string)[];
}

export interface PatchEdge {
  from: [string, number];
  to: [string, number];
}

export interface PatchDoc {
  format: string;
  nodes: PatchNode[];
  edges: PatchEdge[];
}

export interface SampleDetail extends SampleSummary {
  code: string;
  patch: PatchDoc | null;
}

export interface QueueResponse {
  run_id: string;
  samples: SampleSummary[];
}

export interface ReportCell {
  category: string;
  benchmark: string;
  n: number;
  w: number;
  c: number;
  pending_human: number;
  mean_nodes: number | null;
}

export interface Report {
  run_id: string;
  note: string;
  cells: ReportCell[];
  categories: unknown[];
  complexity_tests: unknown[];
}

export interface RatingPayload {
  rater_id: string;
  judgment: Judgment;
  adjudicated?: "pass" | "fail";
}

export interface PostResult {
  status: number;
  ok: boolean;
  detail?: string;
}

export class ReviewApi {
  constructor(private readonly baseUrl: string) {}

  private url(path: string, params?: Record<string, string>): string {
    const search = params ? `?${new URLSearchParams(params)}` : "";
    return `${this.baseUrl}${path}${search}`;
  }

  async listNeedsHuman(raterId: string): Promise<QueueResponse> {
    const response = await fetch(
      this.url("/samples", { status: "needs-human", rater: raterId })
    );
    if (!response.ok) {
      throw new Error(`queue fetch failed: ${response.status}`);
    }
    return (await response.json()) as QueueResponse;
  }

  async getSample(sampleId: string, raterId: string): Promise<SampleDetail> {
    const response = await fetch(
      this.url(`/samples/${sampleId}`, { rater: raterId })
    );
    if (!response.ok) {
      throw new Error(`sample fetch failed: ${response.status}`);
    }
    return (await response.json()) as SampleDetail;
  }

  audioUrl(sampleId: string): string {
    return this.url(`/samples/${sampleId}/audio`);
  }

  async postRating(sampleId: string, payload: RatingPayload): Promise<PostResult> {
    const response = await fetch(this.url(`/samples/${sampleId}/ratings`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    let detail: string | undefined;
    try {
      detail = ((await response.json()) as { detail?: string }).detail;
    } catch {
      detail = undefined;
    }
    return { status: response.status, ok: response.status === 201, detail };
  }

  async getReport(): Promise<Report> {
    const response = await fetch(this.url("/report"));
    if (!response.ok) {
      throw new Error(`report fetch failed: ${response.status}`);
    }
    return (await response.json()) as Report;
  }
}
