/**
 * Browser bootstrap: build the bundled toy corpus, poll until the
 * hierarchy is ready, then run an interactive session against it.
 *
 * The service base URL defaults to same-host port 8000 and can be
 * overridden with `?api=http://host:port`.
 */
import { ApiError, SummationClient } from "./api";
import { SessionController } from "./controller";
import { renderApp, type Handlers } from "./render";
import { TreeView } from "./tree";

const QUERY_BUDGET = 10;
const SUMMARY_BUDGET = 10;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForHierarchy(
  client: SummationClient,
  corpusId: string,
  status: (text: string) => void,
): Promise<TreeView> {
  for (;;) {
    try {
      return new TreeView(await client.getHierarchy(corpusId));
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        status("Corpus build in progress…");
        await sleep(500);
      } else {
        throw err;
      }
    }
  }
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  const status = (text: string) => {
    root.textContent = text;
  };
  const base =
    new URLSearchParams(window.location.search).get("api") ??
    `http://${window.location.hostname}:8000`;
  const client = new SummationClient(base);

  status("Creating corpus…");
  const corpus = await client.createCorpus({ toy: true });
  const tree = await waitForHierarchy(client, corpus.corpus_id, status);

  const controller = new SessionController(client, {
    corpus_id: corpus.corpus_id,
    query_budget: QUERY_BUDGET,
    summary_budget: SUMMARY_BUDGET,
  });
  const handlers: Handlers = {
    onToggle: (key) => {
      tree.toggle(key);
      renderApp(root, controller.state, tree, handlers);
    },
    onSelect: (key) => {
      tree.select(key);
      renderApp(root, controller.state, tree, handlers);
    },
    onChoose: (side) => void controller.choose(side),
    onSummary: (skip) => void controller.requestSummary(skip),
    onRetry: () => void controller.retry(),
  };
  controller.onChange((state) => {
    if (state.summary) {
      tree.setHighlight(state.summary.concepts.map((c) => c.id));
    }
    renderApp(root, state, tree, handlers);
  });
  await controller.start();
}

boot().catch((err) => {
  const root = document.getElementById("app");
  if (root) {
    root.textContent = `Failed to start: ${String(err)}`;
  }
});
