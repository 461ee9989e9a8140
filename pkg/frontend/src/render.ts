/**
 * DOM renderer: three panels (hierarchy, pending query, summary) plus a
 * banner, rebuilt wholesale on every state change. All elements come
 * from the root's own document so the renderer works under any DOM.
 */
import type { SessionViewState } from "./controller";
import type { Choice } from "./api";
import type { TreeView } from "./tree";

export interface Handlers {
  onToggle(key: string): void;
  onSelect(key: string): void;
  onChoose(side: Choice): void;
  onSummary(skipRemaining: boolean): void;
  onRetry(): void;
}

export function renderApp(
  root: HTMLElement,
  state: SessionViewState,
  tree: TreeView | null,
  handlers: Handlers,
): void {
  const doc = root.ownerDocument;
  root.replaceChildren();

  if (state.banner) {
    const banner = doc.createElement("div");
    banner.className = "banner";
    banner.textContent = state.banner;
    const retry = doc.createElement("button");
    retry.className = "retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => handlers.onRetry());
    banner.appendChild(retry);
    root.appendChild(banner);
  }

  const budgets = doc.createElement("div");
  budgets.className = "budgets";
  const remaining = state.remaining === null ? "-" : String(state.remaining);
  budgets.textContent =
    `Queries remaining: ${remaining} | Summary size: ${state.summaryBudget}`;
  root.appendChild(budgets);

  if (tree) {
    root.appendChild(renderTree(doc, tree, handlers));
  }
  root.appendChild(renderQuery(doc, state, handlers));
  if (state.summary) {
    root.appendChild(renderSummary(doc, state));
  }
}

function renderTree(doc: Document, tree: TreeView, handlers: Handlers): HTMLElement {
  const panel = doc.createElement("section");
  panel.className = "tree";
  const list = doc.createElement("ul");
  for (const row of tree.rows()) {
    const item = doc.createElement("li");
    item.style.marginLeft = `${row.depth * 16}px`;
    item.dataset.key = row.key;
    if (row.hasChildren) {
      const expander = doc.createElement("button");
      expander.className = "expander";
      expander.textContent = row.expanded ? "▾" : "▸";
      expander.addEventListener("click", () => handlers.onToggle(row.key));
      item.appendChild(expander);
    }
    const label = doc.createElement("span");
    label.className = "node-label" + (row.highlighted ? " highlighted" : "");
    label.style.fontSize = `${row.size.toFixed(2)}em`;
    label.textContent = `${row.label} (level ${row.level})`;
    label.addEventListener("click", () => handlers.onSelect(row.key));
    item.appendChild(label);
    list.appendChild(item);
  }
  panel.appendChild(list);

  const selected = tree.selectedMembers();
  if (selected) {
    const members = doc.createElement("div");
    members.className = "members";
    const title = doc.createElement("div");
    title.textContent = `Members of ${selected.label}`;
    members.appendChild(title);
    const memberList = doc.createElement("ul");
    for (const member of selected.members) {
      const entry = doc.createElement("li");
      entry.textContent =
        `concept ${member.concept}: membership ${member.membership.toFixed(4)}`;
      memberList.appendChild(entry);
    }
    members.appendChild(memberList);
    panel.appendChild(members);
  }
  return panel;
}

function renderQuery(
  doc: Document,
  state: SessionViewState,
  handlers: Handlers,
): HTMLElement {
  const panel = doc.createElement("section");
  panel.className = "query";
  if (state.phase === "asking" && state.query) {
    const prompt = doc.createElement("p");
    prompt.textContent = "Which concept matters more to you?";
    panel.appendChild(prompt);
    const cards = doc.createElement("div");
    cards.className = "cards";
    for (const side of ["left", "right"] as const) {
      const card = doc.createElement("div");
      card.className = "card";
      const label = doc.createElement("div");
      label.textContent =
        side === "left" ? state.query.left_label : state.query.right_label;
      card.appendChild(label);
      const button = doc.createElement("button");
      button.dataset.side = side;
      button.textContent = "Prefer this";
      button.disabled = state.busy;
      button.addEventListener("click", () => handlers.onChoose(side));
      card.appendChild(button);
      cards.appendChild(card);
    }
    panel.appendChild(cards);
    const skip = doc.createElement("button");
    skip.className = "skip";
    skip.textContent = "Skip remaining and summarize";
    skip.disabled = state.busy;
    skip.addEventListener("click", () => handlers.onSummary(true));
    panel.appendChild(skip);
  } else if (state.phase === "exhausted") {
    const note = doc.createElement("p");
    note.textContent = "Queries exhausted.";
    panel.appendChild(note);
    const generate = doc.createElement("button");
    generate.className = "generate";
    generate.textContent = "Generate summary";
    generate.disabled = state.busy;
    generate.addEventListener("click", () => handlers.onSummary(false));
    panel.appendChild(generate);
  } else if (state.phase === "starting" || state.busy) {
    const note = doc.createElement("p");
    note.textContent = "Working…";
    panel.appendChild(note);
  }
  return panel;
}

function renderSummary(doc: Document, state: SessionViewState): HTMLElement {
  const panel = doc.createElement("section");
  panel.className = "summary";
  const summary = state.summary!;
  const heading = doc.createElement("h2");
  heading.textContent =
    `Summary (${summary.concepts.length}/${summary.budget} concepts, ` +
    `reward ${summary.reward.toFixed(4)})`;
  panel.appendChild(heading);
  const ranked = doc.createElement("ol");
  ranked.className = "ranked";
  const byRank = [...summary.concepts].sort((a, b) => b.rank - a.rank);
  for (const concept of byRank) {
    const entry = doc.createElement("li");
    entry.textContent = `${concept.label} (rank ${concept.rank}, level ${concept.level})`;
    ranked.appendChild(entry);
  }
  panel.appendChild(ranked);
  if (summary.relations.length > 0) {
    const relations = doc.createElement("ul");
    relations.className = "relations";
    const byId = new Map(summary.concepts.map((c) => [c.id, c.label]));
    for (const relation of summary.relations) {
      const entry = doc.createElement("li");
      entry.textContent =
        `${byId.get(relation.from)} → ${relation.phrase} → ${byId.get(relation.to)}`;
      relations.appendChild(entry);
    }
    panel.appendChild(relations);
  }
  return panel;
}
