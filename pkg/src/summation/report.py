"""Figure rendering for evaluation reports.

Every plot goes straight to a file next to its TSV; nothing opens a
display, so the Agg backend is forced before pyplot loads.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_rouge_bars(scores: dict, path) -> None:
    variants = ["R1", "R2", "RL"]
    recalls = [scores[v].recall for v in variants]
    f1s = [scores[v].f1 for v in variants]
    x = range(len(variants))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar([i - 0.18 for i in x], recalls, width=0.36, label="recall")
    ax.bar([i + 0.18 for i in x], f1s, width=0.36, label="f1")
    ax.set_xticks(list(x))
    ax.set_xticklabels(variants)
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title("Summary quality")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_budget_curve(rows: list[dict], path) -> None:
    budgets = [r["budget"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for key, style in (("r1_recall", "o-"), ("r2_recall", "s--"), ("rl_recall", "^:")):
        ax.plot(budgets, [r[key] for r in rows], style, label=key.split("_")[0].upper())
    ax.set_xlabel("summary budget (concepts)")
    ax.set_ylabel("recall")
    ax.set_ylim(0, 1)
    ax.set_title("Recall vs budget")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_feature_curve(rows: list[dict], path) -> None:
    by_size: dict[int, list[float]] = {}
    for r in rows:
        by_size.setdefault(r["set_size"], []).append(r["r1_recall"])
    sizes = sorted(by_size)
    means = [sum(by_size[s]) / len(by_size[s]) for s in sizes]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(sizes, means, "o-")
    for s in sizes:
        ax.scatter([s] * len(by_size[s]), by_size[s], alpha=0.35, color="gray")
    ax.set_xticks(sizes)
    ax.set_xlabel("feature set size")
    ax.set_ylabel("R1 recall")
    ax.set_ylim(0, 1)
    ax.set_title("Recall vs feature set size")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
