import { describe, expect, it } from "vitest";

import { SummationClient, type PendingQuery, type SummaryResponse } from "../src/api";
import { SessionController } from "../src/controller";

interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

type Step = {
  method: string;
  path: string;
  respond: () => Response;
};

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Fetch stub that serves a strict, ordered script of expected requests. */
class ScriptedFetch {
  readonly calls: RecordedCall[] = [];
  private readonly script: Step[] = [];

  on(method: string, path: string, respond: () => Response): this {
    this.script.push({ method, path, respond });
    return this;
  }

  readonly fetch: typeof fetch = async (input, init) => {
    const path = String(input).replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body === undefined ? undefined : JSON.parse(String(init.body));
    this.calls.push({ method, path, body });
    const step = this.script.shift();
    if (!step) {
      throw new Error(`unexpected request: ${method} ${path}`);
    }
    expect(`${method} ${path}`).toBe(`${step.method} ${step.path}`);
    return step.respond();
  };
}

function pair(overrides: Partial<PendingQuery> = {}): PendingQuery {
  return {
    exhausted: false,
    round: 0,
    level: 1,
    left: 3,
    right: 5,
    left_label: "alpha",
    right_label: "beta",
    remaining: 10,
    ...overrides,
  };
}

const SUMMARY: SummaryResponse = {
  concepts: [{ id: 3, label: "alpha", level: 1, rank: 5 }],
  relations: [],
  reward: 0.5,
  rank_sum: 5,
  budget: 10,
  seed: 0,
  set_size: 10,
};

function makeController(scripted: ScriptedFetch) {
  const client = new SummationClient("http://svc", scripted.fetch);
  return new SessionController(client, {
    corpus_id: "corpus-1",
    query_budget: 10,
    summary_budget: 10,
  });
}

async function startedController(scripted: ScriptedFetch) {
  scripted
    .on("POST", "/sessions", () => json(200, { session_id: "session-1" }))
    .on("GET", "/sessions/session-1/query", () => json(200, pair()));
  const controller = makeController(scripted);
  await controller.start();
  return controller;
}

describe("start", () => {
  it("creates the session and shows the first pair", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    const state = controller.state;
    expect(state.phase).toBe("asking");
    expect(state.query?.left_label).toBe("alpha");
    expect(state.remaining).toBe(10);
    expect(state.busy).toBe(false);
    expect(scripted.calls[0].body).toEqual({
      corpus_id: "corpus-1",
      query_budget: 10,
      summary_budget: 10,
    });
  });

  it("reports an exhausted session without inventing a pair", async () => {
    const scripted = new ScriptedFetch()
      .on("POST", "/sessions", () => json(200, { session_id: "session-1" }))
      .on("GET", "/sessions/session-1/query", () => json(200, { exhausted: true }));
    const controller = makeController(scripted);
    await controller.start();
    expect(controller.state.phase).toBe("exhausted");
    expect(controller.state.query).toBeNull();
  });
});

describe("choose", () => {
  it("posts the choice verbatim and renders the server's next pair", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted
      .on("POST", "/sessions/session-1/feedback", () =>
        json(200, { remaining: 9, state: "querying", retrained: false }),
      )
      .on("GET", "/sessions/session-1/query", () =>
        json(200, pair({ left: 7, left_label: "gamma", remaining: 9 })),
      );
    await controller.choose("left");
    expect(scripted.calls[2].body).toEqual({ choice: "left" });
    expect(controller.state.query?.left_label).toBe("gamma");
    expect(controller.state.remaining).toBe(9);
  });

  it("takes the remaining budget from the response, not a local count", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted
      .on("POST", "/sessions/session-1/feedback", () =>
        json(200, { remaining: 7, state: "querying", retrained: true }),
      )
      .on("GET", "/sessions/session-1/query", () => json(200, pair({ remaining: 7 })));
    await controller.choose("right");
    expect(controller.state.remaining).toBe(7);
  });

  it("ignores a second submit while the first is in flight", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted
      .on("POST", "/sessions/session-1/feedback", () =>
        json(200, { remaining: 9, state: "querying", retrained: false }),
      )
      .on("GET", "/sessions/session-1/query", () => json(200, pair({ remaining: 9 })));
    await Promise.all([controller.choose("left"), controller.choose("right")]);
    const feedbackCalls = scripted.calls.filter((c) => c.path.endsWith("/feedback"));
    expect(feedbackCalls).toHaveLength(1);
    expect(feedbackCalls[0].body).toEqual({ choice: "left" });
    expect(controller.state.busy).toBe(false);
  });

  it("treats 409 as already answered and refetches the pending pair", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted
      .on("POST", "/sessions/session-1/feedback", () =>
        json(409, { detail: "no pending query" }),
      )
      .on("GET", "/sessions/session-1/query", () => json(200, pair({ remaining: 9 })));
    await controller.choose("left");
    expect(controller.state.banner).toContain("Already answered");
    expect(controller.state.remaining).toBe(9);
    expect(controller.state.phase).toBe("asking");
  });

  it("keeps the current pair when the service is unreachable", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted.on("POST", "/sessions/session-1/feedback", () => {
      throw new TypeError("fetch failed");
    });
    await controller.choose("left");
    const state = controller.state;
    expect(state.banner).toContain("unreachable");
    expect(state.query?.left_label).toBe("alpha");
    expect(state.busy).toBe(false);

    scripted.on("GET", "/sessions/session-1/query", () => json(200, pair()));
    await controller.retry();
    expect(controller.state.banner).toBeNull();
    expect(controller.state.phase).toBe("asking");
  });

  it("does nothing once the session is done", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted.on("POST", "/sessions/session-1/summary", () => json(200, SUMMARY));
    await controller.requestSummary(true);
    await controller.choose("left");
    expect(scripted.calls.filter((c) => c.path.endsWith("/feedback"))).toHaveLength(0);
  });
});

describe("requestSummary", () => {
  it("moves into the exhausted call-to-action and then renders the summary", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted
      .on("POST", "/sessions/session-1/feedback", () =>
        json(200, { remaining: 0, state: "trained", retrained: true }),
      )
      .on("GET", "/sessions/session-1/query", () => json(200, { exhausted: true }));
    await controller.choose("left");
    expect(controller.state.phase).toBe("exhausted");

    scripted.on("POST", "/sessions/session-1/summary", () => json(200, SUMMARY));
    await controller.requestSummary();
    expect(scripted.calls.at(-1)?.body).toEqual({});
    expect(controller.state.phase).toBe("done");
    expect(controller.state.summary?.reward).toBe(0.5);
  });

  it("prompts to finish or skip when queries remain", async () => {
    const scripted = new ScriptedFetch();
    const controller = await startedController(scripted);
    scripted.on("POST", "/sessions/session-1/summary", () =>
      json(422, { detail: "queries remain; answer them or pass skip_remaining" }),
    );
    await controller.requestSummary();
    expect(controller.state.banner).toContain("answer them or skip");
    expect(controller.state.phase).toBe("asking");
    expect(controller.state.summary).toBeNull();

    scripted.on("POST", "/sessions/session-1/summary", () => json(200, SUMMARY));
    await controller.requestSummary(true);
    expect(scripted.calls.at(-1)?.body).toEqual({ skip_remaining: true });
    expect(controller.state.phase).toBe("done");
  });
});
