/**
 * Session state machine.
 *
 * Every transition is driven by a service response: the controller never
 * advances the pair, decrements a budget, or invents state on its own.
 * One request is in flight at a time; while `busy` is set all user
 * actions are ignored, which is the double-submit guard.
 */
import {
  ApiError,
  type Choice,
  type PendingQuery,
  type SessionRequest,
  type SummationClient,
  type SummaryResponse,
} from "./api";

export type Phase = "idle" | "starting" | "asking" | "exhausted" | "done" | "failed";

export interface SessionViewState {
  phase: Phase;
  sessionId: string | null;
  query: PendingQuery | null;
  remaining: number | null;
  summaryBudget: number;
  summary: SummaryResponse | null;
  banner: string | null;
  busy: boolean;
}

type Listener = (state: SessionViewState) => void;

export class SessionController {
  private view: SessionViewState;
  private readonly listeners: Listener[] = [];

  constructor(
    private readonly client: SummationClient,
    private readonly request: SessionRequest,
  ) {
    this.view = {
      phase: "idle",
      sessionId: null,
      query: null,
      remaining: null,
      summaryBudget: request.summary_budget,
      summary: null,
      banner: null,
      busy: false,
    };
  }

  get state(): SessionViewState {
    return { ...this.view };
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<SessionViewState>): void {
    this.view = { ...this.view, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async start(): Promise<void> {
    if (this.view.busy || this.view.sessionId !== null) {
      return;
    }
    this.update({ busy: true, phase: "starting", banner: null });
    try {
      const created = await this.client.createSession(this.request);
      this.update({ sessionId: created.session_id });
      await this.refreshQuery();
    } catch (err) {
      this.handleFailure(err);
    }
  }

  /** Submit the displayed pair; ignored while a request is in flight. */
  async choose(side: Choice): Promise<void> {
    if (this.view.busy || this.view.phase !== "asking" || !this.view.sessionId) {
      return;
    }
    this.update({ busy: true, banner: null });
    try {
      const ack = await this.client.postFeedback(this.view.sessionId, side);
      this.update({ remaining: ack.remaining });
      await this.refreshQuery();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.update({ banner: "Already answered; refreshed the pending query." });
        try {
          await this.refreshQuery();
        } catch (refreshErr) {
          this.handleFailure(refreshErr);
        }
      } else {
        this.handleFailure(err);
      }
    }
  }

  /** Re-fetch the pending query, e.g. after an offline banner. */
  async retry(): Promise<void> {
    if (this.view.busy || !this.view.sessionId) {
      return;
    }
    this.update({ busy: true, banner: null });
    try {
      await this.refreshQuery();
    } catch (err) {
      this.handleFailure(err);
    }
  }

  async requestSummary(skipRemaining = false): Promise<void> {
    if (this.view.busy || !this.view.sessionId || this.view.phase === "done") {
      return;
    }
    this.update({ busy: true, banner: null });
    try {
      const summary = await this.client.postSummary(this.view.sessionId, skipRemaining);
      this.update({ summary, phase: "done", query: null, busy: false });
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.update({
          banner: "Queries remain: answer them or skip the rest to summarize.",
          busy: false,
        });
      } else {
        this.handleFailure(err);
      }
    }
  }

  private async refreshQuery(): Promise<void> {
    if (!this.view.sessionId) {
      return;
    }
    const query = await this.client.getQuery(this.view.sessionId);
    if (query.exhausted) {
      this.update({ phase: "exhausted", query: null, busy: false });
    } else {
      this.update({
        phase: "asking",
        query,
        remaining: query.remaining,
        busy: false,
      });
    }
  }

  private handleFailure(err: unknown): void {
    if (err instanceof ApiError) {
      this.update({ banner: `Service error: ${err.detail}`, busy: false });
    } else {
      // Network failure: keep the current pair so nothing is lost.
      this.update({
        banner: "Service unreachable; retry when it is back.",
        busy: false,
      });
    }
  }
}
