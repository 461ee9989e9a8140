"""Batch command line driver for the summarization pipeline.

Every subcommand is a deterministic function of its arguments: the same
argv and seed produce byte-identical artifacts. Preference feedback is
answered by the reference-based oracle, so no human is in the loop.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipeline
from .errors import SummationError
from .toy import write_toy_workspace


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="summation",
        description="Personalized multi-document summarization over hierarchical concept maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="extract concepts and relation triples from a corpus")
    p.add_argument("--corpus", help="corpus JSONL (one {id,title,text} object per line)")
    p.add_argument("--vectors", help="word vector file (.vec text format)")
    p.add_argument("--triples", help="pre-extracted triples JSONL instead of the heuristic extractor")
    p.add_argument("--toy", action="store_true",
                   help="materialize the built-in demo corpus into OUT/data and ingest it")
    p.add_argument("--tau", type=float, default=0.9, help="stage-2 merge cosine threshold")
    p.add_argument("--dim", type=int, default=50, help="embedding dim when training vectors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("build", help="build the hierarchical concept map")
    p.add_argument("--concepts", required=True, help="concepts.json from ingest")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.1, help="evenness penalty weight")
    p.add_argument("--min-node-size", type=int, default=2)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="run the simulated preference loop and fit the utility model")
    p.add_argument("--concepts", required=True)
    p.add_argument("--hierarchy", required=True, help="hierarchy.json from build")
    p.add_argument("--references", required=True, help="JSON list of reference summary strings")
    p.add_argument("--query-budget", type=int, default=40)
    p.add_argument("--strategy", choices=("chain", "active"), default="chain")
    p.add_argument("--feature-set", type=int, default=10, choices=(2, 5, 8, 10))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("summarize", help="train the selection policy and emit a summary")
    p.add_argument("--concepts", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--ranking", required=True, help="ranking.json from train")
    p.add_argument("--features", required=True, help="features.json from train")
    p.add_argument("--summary-budget", type=int, default=10)
    p.add_argument("--feature-set", type=int, default=10, choices=(2, 5, 8, 10))
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score a summary against references with ROUGE")
    p.add_argument("--summary", required=True, help="summary.json from summarize")
    p.add_argument("--references", required=True)
    p.add_argument("--word-limit", type=int, default=75)
    p.add_argument("--out", required=True)

    p = sub.add_parser("budget-sweep", help="summary quality across summary budgets")
    p.add_argument("--concepts", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--budgets", type=_int_list, default=[10, 15, 20, 25, 30, 35])
    p.add_argument("--feature-set", type=int, default=10, choices=(2, 5, 8, 10))
    p.add_argument("--query-budget", type=int, default=40)
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--word-limit", type=int, default=75)
    p.add_argument("--out", required=True)

    p = sub.add_parser("feature-sweep", help="summary quality across feature-set sizes")
    p.add_argument("--concepts", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--set-sizes", type=_int_list, default=[2, 5, 8, 10])
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--summary-budget", type=int, default=10)
    p.add_argument("--query-budget", type=int, default=40)
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--word-limit", type=int, default=75)
    p.add_argument("--out", required=True)

    return parser


def _cmd_ingest(args) -> int:
    out = Path(args.out)
    if args.toy:
        paths = write_toy_workspace(out / "data")
        corpus, vectors = paths["corpus"], paths["vectors"]
        triples = None
    else:
        if not args.corpus:
            print("error: --corpus is required unless --toy is given", file=sys.stderr)
            return 2
        corpus, vectors, triples = args.corpus, args.vectors, args.triples
    pipeline.run_ingest(
        corpus, out, vectors_path=vectors, triples_path=triples,
        tau=args.tau, dim=args.dim, seed=args.seed,
    )
    return 0


def _cmd_build(args) -> int:
    pipeline.run_build(
        args.concepts, args.out,
        k_range=(args.k_min, args.k_max), alpha=args.alpha,
        min_node_size=args.min_node_size, max_depth=args.max_depth,
        seed=args.seed,
    )
    return 0


def _cmd_train(args) -> int:
    pipeline.run_train(
        args.concepts, args.hierarchy, args.references, args.out,
        query_budget=args.query_budget, strategy=args.strategy,
        set_size=args.feature_set, seed=args.seed,
    )
    return 0


def _cmd_summarize(args) -> int:
    pipeline.run_summarize(
        args.concepts, args.hierarchy, args.ranking, args.features, args.out,
        budget=args.summary_budget, set_size=args.feature_set,
        episodes=args.episodes, seed=args.seed,
    )
    return 0


def _cmd_eval(args) -> int:
    pipeline.run_eval(args.summary, args.references, args.out, word_limit=args.word_limit)
    return 0


def _cmd_budget_sweep(args) -> int:
    pipeline.run_budget_sweep(
        args.concepts, args.hierarchy, args.references, args.out,
        budgets=tuple(args.budgets), set_size=args.feature_set,
        query_budget=args.query_budget, episodes=args.episodes,
        seed=args.seed, word_limit=args.word_limit,
    )
    return 0


def _cmd_feature_sweep(args) -> int:
    pipeline.run_feature_sweep(
        args.concepts, args.hierarchy, args.references, args.out,
        set_sizes=tuple(args.set_sizes), seeds=tuple(args.seeds),
        budget=args.summary_budget, query_budget=args.query_budget,
        episodes=args.episodes, word_limit=args.word_limit,
    )
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "build": _cmd_build,
    "train": _cmd_train,
    "summarize": _cmd_summarize,
    "eval": _cmd_eval,
    "budget-sweep": _cmd_budget_sweep,
    "feature-sweep": _cmd_feature_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except SummationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
