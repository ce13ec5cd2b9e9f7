/**
 * The rating interface. One card per queued sample: benchmark context,
 * read-only code, the patch graph, the server-rendered audio, and the
 * three judgment buttons, which stay disabled until the audio has been
 * played at least once. Disagreements and unsures move to the
 * adjudication lane, whose resolution posts the team's record.
 */

import type { Judgment, ReviewApi, SampleDetail, SampleSummary } from "./api.js";
import { patchSvg } from "./graphview.js";
import { ReviewSession, adjudicationLane, buildQueue } from "./state.js";

const JUDGMENTS: Judgment[] = ["pass", "fail", "unsure"];

/** Cards rendered at once; the queue advances as judgments land. */
export const QUEUE_PAGE_SIZE = 10;

export class RaterApp {
  readonly session: ReviewSession;
  private runId = "";
  private samples: SampleSummary[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ReviewApi,
    raterId: string
  ) {
    this.session = new ReviewSession(api, raterId);
  }

  get raterId(): string {
    return this.session.raterId;
  }

  async load(): Promise<void> {
    try {
      const queue = await this.api.listNeedsHuman(this.raterId);
      this.runId = queue.run_id;
      this.samples = queue.samples;
    } catch {
      this.renderOffline();
      return;
    }
    await this.render();
  }

  private doc(): Document {
    return this.root.ownerDocument;
  }

  private el(tag: string, className?: string, text?: string): HTMLElement {
    const node = this.doc().createElement(tag);
    if (className) {
      node.className = className;
    }
    if (text !== undefined) {
      node.textContent = text;
    }
    return node;
  }

  private renderOffline(): void {
    this.root.textContent = "";
    const banner = this.el("div", "offline-banner",
      "Review service unreachable - queue is empty. Retry when the server is back.");
    this.root.appendChild(banner);
  }

  private async render(): Promise<void> {
    this.root.textContent = "";
    const header = this.el("header", "app-header");
    header.appendChild(this.el("h1", undefined, "patchbench rater"));
    header.appendChild(
      this.el("p", "rater-line", `rater: ${this.raterId} | run: ${this.runId}`)
    );
    this.root.appendChild(header);

    const queue = buildQueue(this.samples, this.runId);
    const lane = adjudicationLane(this.samples);

    const queueSection = this.el("section", "queue");
    queueSection.appendChild(this.el("h2", undefined, "To rate"));
    if (queue.length === 0) {
      queueSection.appendChild(
        this.el("p", "done-state", "Done - no samples awaiting your judgment.")
      );
    }
    for (const sample of queue.slice(0, QUEUE_PAGE_SIZE)) {
      queueSection.appendChild(await this.buildCard(sample));
    }
    if (queue.length > QUEUE_PAGE_SIZE) {
      queueSection.appendChild(
        this.el("p", "queue-overflow",
          `${queue.length - QUEUE_PAGE_SIZE} more queued after these.`)
      );
    }
    this.root.appendChild(queueSection);

    const laneSection = this.el("section", "adjudication-lane");
    laneSection.appendChild(this.el("h2", undefined, "Adjudication lane"));
    if (lane.length === 0) {
      laneSection.appendChild(this.el("p", "lane-empty", "No disagreements to resolve."));
    }
    for (const sample of lane) {
      laneSection.appendChild(this.buildAdjudicationCard(sample));
    }
    this.root.appendChild(laneSection);
  }

  private async buildCard(sample: SampleSummary): Promise<HTMLElement> {
    let detail: SampleDetail | null = null;
    try {
      detail = await this.api.getSample(sample.id, this.raterId);
    } catch {
      detail = null;
    }

    const card = this.el("article", "sample-card");
    card.dataset.sampleId = sample.id;

    const title = this.el("h3", undefined,
      `${sample.benchmark_name} - sample ${sample.index} (${sample.category})`);
    card.appendChild(title);
    card.appendChild(
      this.el("p", "reference-hint",
        `Reference technique: ${sample.paired_with}. Nodes: ${sample.node_count ?? "?"}.`)
    );

    if (detail) {
      const code = this.el("pre", "code-view");
      code.textContent = detail.code;
      card.appendChild(code);
      if (detail.patch) {
        const holder = this.el("div", "patch-holder");
        holder.innerHTML = patchSvg(detail.patch);
        card.appendChild(holder);
      }
    }

    const audio = this.doc().createElement("audio");
    audio.controls = true;
    audio.src = this.api.audioUrl(sample.id);
    audio.className = "sample-audio";
    card.appendChild(audio);

    const notice = this.el("p", "play-notice", "Play the audio to unlock judging.");
    card.appendChild(notice);

    const buttons: HTMLButtonElement[] = [];
    const buttonRow = this.el("div", "judgment-row");
    for (const judgment of JUDGMENTS) {
      const button = this.doc().createElement("button");
      button.textContent = judgment;
      button.className = `judge judge-${judgment}`;
      button.disabled = true;
      button.addEventListener("click", () => {
        void this.handleJudgment(sample.id, judgment, card);
      });
      buttons.push(button);
      buttonRow.appendChild(button);
    }
    card.appendChild(buttonRow);

    audio.addEventListener("play", () => {
      this.session.markPlayed(sample.id);
      for (const button of buttons) {
        button.disabled = false;
      }
      notice.textContent = "Audio played - judge when ready.";
    });

    return card;
  }

  private async handleJudgment(
    sampleId: string,
    judgment: Judgment,
    card: HTMLElement
  ): Promise<void> {
    if (!this.session.canJudge(sampleId)) {
      return; // buttons only enable after playback; belt and braces
    }
    const outcome = await this.session.submit(sampleId, judgment);
    if (outcome === "accepted" || outcome === "duplicate") {
      // refresh: agreement closes the card, disagreement surfaces in the lane
      await this.load();
      return;
    }
    if (outcome === "queued-retry") {
      card.classList.add("pending-retry");
      const note = this.el("p", "retry-note",
        "Submission stored locally; will retry when the service is back.");
      card.appendChild(note);
    }
  }

  private buildAdjudicationCard(sample: SampleSummary): HTMLElement {
    const card = this.el("article", "adjudication-card");
    card.dataset.sampleId = sample.id;
    card.appendChild(this.el("h3", undefined,
      `${sample.benchmark_name} - sample ${sample.index}`));

    const judgments = this.el("p", "both-judgments");
    const partners = (sample.partner_judgments ?? [])
      .map((p) => `${p.rater_id}: ${p.judgment}`)
      .join(", ");
    judgments.textContent = `you: ${sample.my_judgment} | ${partners}`;
    card.appendChild(judgments);

    const discussion = this.doc().createElement("textarea");
    discussion.className = "discussion";
    discussion.placeholder = "notes from the team discussion";
    card.appendChild(discussion);

    const row = this.el("div", "adjudication-row");
    for (const value of ["pass", "fail"] as const) {
      const button = this.doc().createElement("button");
      button.textContent = `adjudicate ${value}`;
      button.className = `adjudicate adjudicate-${value}`;
      button.addEventListener("click", () => {
        void this.session
          .submitAdjudication(sample.id, value, discussion.value)
          .then(() => this.load());
      });
      row.appendChild(button);
    }
    card.appendChild(row);
    return card;
  }
}

export function mountApp(root: HTMLElement, api: ReviewApi, raterId: string): RaterApp {
  const app = new RaterApp(root, api, raterId);
  void app.load();
  return app;
}
