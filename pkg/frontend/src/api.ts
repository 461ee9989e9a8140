/**
 * Typed client for the summation service HTTP API.
 *
 * Every response is validated against a schema before it reaches view
 * code, so the UI can only ever render server-shaped state.
 */
import { z } from "zod";

const memberSchema = z.object({
  concept: z.number().int(),
  membership: z.number(),
});

export type HierarchyMember = z.infer<typeof memberSchema>;

export interface HierarchyExport {
  label: string;
  label_id: number;
  level: number;
  members: HierarchyMember[];
  children: HierarchyExport[];
}

const hierarchySchema: z.ZodType<HierarchyExport> = z.lazy(() =>
  z.object({
    label: z.string(),
    label_id: z.number().int(),
    level: z.number().int(),
    members: z.array(memberSchema),
    children: z.array(hierarchySchema),
  }),
);

const corpusCreatedSchema = z.object({
  corpus_id: z.string(),
  status: z.string(),
});

const sessionCreatedSchema = z.object({
  session_id: z.string(),
});

const pendingQuerySchema = z.object({
  exhausted: z.literal(false),
  round: z.number().int(),
  level: z.number().int(),
  left: z.number().int(),
  right: z.number().int(),
  left_label: z.string(),
  right_label: z.string(),
  remaining: z.number().int(),
});

const querySchema = z.union([
  z.object({ exhausted: z.literal(true) }),
  pendingQuerySchema,
]);

const feedbackAckSchema = z.object({
  remaining: z.number().int(),
  state: z.string(),
  retrained: z.boolean(),
});

const summarySchema = z.object({
  concepts: z.array(
    z.object({
      id: z.number().int(),
      label: z.string(),
      level: z.number().int(),
      rank: z.number().int(),
    }),
  ),
  relations: z.array(
    z.object({
      from: z.number().int(),
      to: z.number().int(),
      phrase: z.string(),
    }),
  ),
  reward: z.number(),
  rank_sum: z.number().int(),
  budget: z.number().int(),
  seed: z.number().int(),
  set_size: z.number().int(),
});

export type CorpusCreated = z.infer<typeof corpusCreatedSchema>;
export type PendingQuery = z.infer<typeof pendingQuerySchema>;
export type QueryResponse = z.infer<typeof querySchema>;
export type FeedbackAck = z.infer<typeof feedbackAckSchema>;
export type SummaryResponse = z.infer<typeof summarySchema>;

export type Choice = "left" | "right";

export interface CorpusRequest {
  toy?: boolean;
  jsonl?: string;
  path?: string;
  vectors_path?: string;
  tau?: number;
  dim?: number;
}

export interface SessionRequest {
  corpus_id: string;
  query_budget: number;
  summary_budget: number;
  feature_set_size?: 2 | 5 | 8 | 10;
  strategy?: "chain" | "active";
  seed?: number;
}

/** Non-2xx response, carrying the server's `detail` message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export class SummationClient {
  private readonly fetchImpl: typeof fetch;

  constructor(
    private readonly baseUrl: string,
    fetchImpl?: typeof fetch,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    schema: z.ZodType<T>,
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed: unknown = await response.json();
        if (parsed && typeof parsed === "object" && "detail" in parsed) {
          const d = (parsed as { detail: unknown }).detail;
          detail = typeof d === "string" ? d : JSON.stringify(d);
        }
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return schema.parse(await response.json());
  }

  health(): Promise<{ status: string }> {
    return this.request(z.object({ status: z.string() }), "GET", "/health");
  }

  createCorpus(body: CorpusRequest): Promise<CorpusCreated> {
    return this.request(corpusCreatedSchema, "POST", "/corpora", body);
  }

  getHierarchy(corpusId: string): Promise<HierarchyExport> {
    return this.request(hierarchySchema, "GET", `/corpora/${corpusId}/hierarchy`);
  }

  createSession(body: SessionRequest): Promise<{ session_id: string }> {
    return this.request(sessionCreatedSchema, "POST", "/sessions", body);
  }

  getQuery(sessionId: string): Promise<QueryResponse> {
    return this.request(querySchema, "GET", `/sessions/${sessionId}/query`);
  }

  postFeedback(sessionId: string, choice: Choice): Promise<FeedbackAck> {
    return this.request(feedbackAckSchema, "POST", `/sessions/${sessionId}/feedback`, {
      choice,
    });
  }

  postSummary(sessionId: string, skipRemaining = false): Promise<SummaryResponse> {
    return this.request(
      summarySchema,
      "POST",
      `/sessions/${sessionId}/summary`,
      skipRemaining ? { skip_remaining: true } : {},
    );
  }
}
