/**
 * End-to-end scripted session against a live service.
 *
 * Spawns the Python HTTP service, builds the bundled toy corpus, then
 * drives the real view code (SessionController + renderApp) inside a
 * jsdom page: every pending pair is answered by clicking the rendered
 * card button, with choices supplied by the same simulated oracle the
 * command line pipeline uses. The finished summary must be identical to
 * the one the command line produces from the same seed, and a second
 * click while a request is in flight must not record a second
 * preference.
 */
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createInterface } from "node:readline";
import { JSDOM } from "jsdom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, SummationClient, type Choice, type HierarchyExport } from "../src/api";
import { SessionController } from "../src/controller";
import { renderApp, type Handlers } from "../src/render";
import { TreeView } from "../src/tree";

const PY = "python3";
const PORT = 8900 + (process.pid % 100);
const BASE = `http://127.0.0.1:${PORT}`;
const QUERY_BUDGET = 10;
const SUMMARY_BUDGET = 10;

const CLI_ENTRY = "import sys; from summation.cli import main; sys.exit(main(sys.argv[1:]))";

// Line protocol: "level left right" on stdin, "left"/"right" on stdout.
const ORACLE_SOURCE = `
import sys
from summation.pipeline import load_concepts, load_references
from summation.preference import QueryPair, simulated_oracle

result = load_concepts(sys.argv[1])
references = load_references(sys.argv[2])
oracle = simulated_oracle(references, result.concepts)
for line in sys.stdin:
    parts = line.split()
    if len(parts) != 3:
        continue
    level, left, right = (int(p) for p in parts)
    print(oracle(QueryPair(level=level, left=left, right=right)), flush=True)
`;

let workDir: string;
let cliDir: string;
let svcDataDir: string;
let service: ChildProcess | undefined;
let serviceOutput = "";
let oracle: ChildProcess | undefined;
const oracleWaiters: Array<(choice: Choice) => void> = [];
let client: SummationClient;
let corpusId: string;

function runCli(args: string[]): void {
  const proc = spawnSync(PY, ["-c", CLI_ENTRY, ...args], { encoding: "utf-8" });
  if (proc.status !== 0) {
    throw new Error(`cli ${args[0]} exited ${proc.status}:\n${proc.stderr}`);
  }
}

function askOracle(level: number, left: number, right: number): Promise<Choice> {
  return new Promise((resolve) => {
    oracleWaiters.push(resolve);
    oracle!.stdin!.write(`${level} ${left} ${right}\n`);
  });
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor(
  cond: () => boolean,
  what: string,
  timeoutMs = 60_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!cond()) {
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await sleep(25);
  }
}

interface LogEvent {
  type: string;
  round?: number;
  level?: number;
  left?: number;
  right?: number;
  choice?: string;
}

function readLog(sessionId: string): LogEvent[] {
  const raw = readFileSync(join(svcDataDir, "sessions", sessionId, "log.jsonl"), "utf-8");
  return raw
    .trim()
    .split("\n")
    .map((line) => JSON.parse(line) as LogEvent);
}

function preferenceFields(record: LogEvent) {
  return {
    round: record.round,
    level: record.level,
    left: record.left,
    right: record.right,
    choice: record.choice,
  };
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "summation-e2e-"));
  cliDir = join(workDir, "cli");
  svcDataDir = join(workDir, "service");
  const concepts = join(cliDir, "concepts.json");
  const hierarchy = join(cliDir, "hierarchy.json");
  const references = join(cliDir, "data", "references.json");

  // Reference run through the command line, same seed and budgets as
  // the scripted session below.
  runCli(["ingest", "--toy", "--seed", "0", "--out", cliDir]);
  runCli(["build", "--concepts", concepts, "--seed", "0", "--out", cliDir]);
  runCli([
    "train", "--concepts", concepts, "--hierarchy", hierarchy,
    "--references", references,
    "--query-budget", String(QUERY_BUDGET), "--seed", "0", "--out", cliDir,
  ]);
  runCli([
    "summarize", "--concepts", concepts, "--hierarchy", hierarchy,
    "--ranking", join(cliDir, "ranking.json"),
    "--features", join(cliDir, "features.json"),
    "--summary-budget", String(SUMMARY_BUDGET), "--seed", "0", "--out", cliDir,
  ]);

  // Oracle responder over the command line artifacts.
  oracle = spawn(PY, ["-u", "-c", ORACLE_SOURCE, concepts, references], {
    stdio: ["pipe", "pipe", "inherit"],
  });
  createInterface({ input: oracle.stdout! }).on("line", (line) => {
    const next = oracleWaiters.shift();
    if (next) {
      next(line.trim() as Choice);
    }
  });

  service = spawn(PY, ["-m", "summation.service"], {
    env: {
      ...process.env,
      SUMMATION_DATA_DIR: svcDataDir,
      SUMMATION_PORT: String(PORT),
      SUMMATION_SEED: "0",
    },
    stdio: ["ignore", "pipe", "pipe"],
  });
  service.stdout!.on("data", (chunk: Buffer) => {
    serviceOutput += chunk.toString();
  });
  service.stderr!.on("data", (chunk: Buffer) => {
    serviceOutput += chunk.toString();
  });

  client = new SummationClient(BASE);
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      await client.health();
      break;
    } catch {
      if (Date.now() > deadline) {
        throw new Error(`service never came up on ${BASE}:\n${serviceOutput}`);
      }
      await sleep(200);
    }
  }
});

afterAll(() => {
  service?.kill();
  oracle?.kill();
  if (workDir) {
    rmSync(workDir, { recursive: true, force: true });
  }
});

describe("scripted session against a live service", () => {
  it("builds the toy corpus and serves the hierarchy", async () => {
    const created = await client.createCorpus({ toy: true });
    corpusId = created.corpus_id;

    // The build runs in the background; poll through the 404 window.
    let root: HierarchyExport | null = null;
    const deadline = Date.now() + 120_000;
    while (root === null) {
      try {
        root = await client.getHierarchy(corpusId);
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          if (Date.now() > deadline) {
            throw new Error(`corpus build never finished:\n${serviceOutput}`);
          }
          await sleep(250);
        } else {
          throw err;
        }
      }
    }
    expect(root.level).toBe(0);
    const tree = new TreeView(root);
    expect(tree.rows().length).toBeGreaterThan(0);
  }, 150_000);

  it("a session driven through the rendered page matches the command line run", async () => {
    const tree = new TreeView(await client.getHierarchy(corpusId));
    const dom = new JSDOM('<!doctype html><html><body><div id="app"></div></body></html>');
    const rootEl = dom.window.document.getElementById("app") as HTMLElement;

    const controller = new SessionController(client, {
      corpus_id: corpusId,
      query_budget: QUERY_BUDGET,
      summary_budget: SUMMARY_BUDGET,
    });
    const handlers: Handlers = {
      onToggle: (key) => {
        tree.toggle(key);
        draw();
      },
      onSelect: (key) => {
        tree.select(key);
        draw();
      },
      onChoose: (side) => void controller.choose(side),
      onSummary: (skip) => void controller.requestSummary(skip),
      onRetry: () => void controller.retry(),
    };
    function draw(): void {
      renderApp(rootEl, controller.state, tree, handlers);
    }
    controller.onChange(() => draw());

    await controller.start();
    await waitFor(
      () => !controller.state.busy && controller.state.phase !== "starting",
      "first query",
    );

    let answered = 0;
    while (controller.state.phase === "asking") {
      const query = controller.state.query!;
      const choice = await askOracle(query.level, query.left, query.right);
      const button = rootEl.querySelector<HTMLButtonElement>(
        `button[data-side="${choice}"]`,
      );
      expect(button).not.toBeNull();
      expect(button!.disabled).toBe(false);

      // First click submits; the re-render disables the cards, and a
      // second click on the stale node must hit the in-flight guard.
      button!.click();
      const redrawn = rootEl.querySelector<HTMLButtonElement>("button[data-side]");
      if (redrawn) {
        expect(redrawn.disabled).toBe(true);
      }
      button!.click();

      answered += 1;
      await waitFor(() => !controller.state.busy, `feedback ${answered}`);
      expect(controller.state.banner).toBeNull();
    }
    expect(answered).toBe(QUERY_BUDGET);
    expect(controller.state.phase).toBe("exhausted");

    const generate = rootEl.querySelector<HTMLButtonElement>("button.generate");
    expect(generate).not.toBeNull();
    generate!.click();
    await waitFor(() => controller.state.phase === "done", "summary", 120_000);

    const uiSummary = controller.state.summary!;
    const cliSummary: unknown = JSON.parse(
      readFileSync(join(cliDir, "summary.json"), "utf-8"),
    );
    expect(uiSummary).toEqual(cliSummary);
    expect(rootEl.querySelector(".summary")).not.toBeNull();

    // Exactly one recorded preference per pair, despite the double
    // clicks, and the transcript matches the command line run.
    const feedback = readLog(controller.state.sessionId!).filter(
      (event) => event.type === "feedback",
    );
    expect(feedback.length).toBe(QUERY_BUDGET);
    const cliPreferences = readFileSync(join(cliDir, "preferences.jsonl"), "utf-8")
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line) as LogEvent);
    expect(feedback.map(preferenceFields)).toEqual(cliPreferences.map(preferenceFields));
  }, 240_000);

  it("rejects early summaries, double submits, and post-completion feedback", async () => {
    const created = await client.createSession({
      corpus_id: corpusId,
      query_budget: 2,
      summary_budget: 3,
    });
    const sessionId = created.session_id;

    // Summary before the budget is spent: refused unless skipped.
    await expect(client.postSummary(sessionId)).rejects.toMatchObject({
      status: 422,
    });

    const query = await client.getQuery(sessionId);
    expect(query.exhausted).toBe(false);
    const ack = await client.postFeedback(sessionId, "left");
    expect(ack.remaining).toBe(1);

    // Same pair again: no pending query left to answer.
    await expect(client.postFeedback(sessionId, "left")).rejects.toMatchObject({
      status: 409,
    });

    const summary = await client.postSummary(sessionId, true);
    expect(summary.concepts.length).toBeGreaterThan(0);
    expect(summary.concepts.length).toBeLessThanOrEqual(3);

    // Finished sessions accept no further feedback.
    await expect(client.postFeedback(sessionId, "right")).rejects.toMatchObject({
      status: 409,
    });
    const after = await client.getQuery(sessionId);
    expect(after.exhausted).toBe(true);

    const feedback = readLog(sessionId).filter((event) => event.type === "feedback");
    expect(feedback.length).toBe(1);
  }, 120_000);
});
