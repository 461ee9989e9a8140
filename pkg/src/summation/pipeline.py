"""End-to-end orchestration and artifact IO.

Stages mirror the CLI: ingest produces concepts and relations, build
produces the hierarchy, train runs the simulated preference loop into a
utility model and ranking, summarize trains the selection policy and
rolls it out, eval scores against references. Every artifact is JSON
with sorted keys (or TSV) and contains no timestamps, so identical
inputs and seeds give byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding import VectorStore, load_vectors, train_embeddings
from .features import FULL_SCHEMA, CorpusStats, compute_stats, phi_matrix, stats_to_tsv
from .hierarchy import (
    Concept,
    HierarchyNode,
    HierarchyParams,
    build_hierarchy,
    group_mentions,
    hierarchy_from_json,
    hierarchy_to_json,
)
from .ingest import (
    Corpus,
    Sentence,
    extract_triples,
    load_corpus,
    load_preextracted,
    normalize_mentions,
    segment_and_tokenize,
    tokenize,
)
from .policy import generate_summary, selectable_concepts, train_td
from .preference import (
    PreferenceRecord,
    QueryPair,
    UtilityModel,
    rank_concepts,
    schedule_queries,
    simulated_oracle,
    train_utility,
)
from .rouge import rouge_score


@dataclass
class AnalyzedCorpus:
    """Document ids plus tokenized sentences; enough for statistics."""

    documents: list[str]
    sentences: list[Sentence]


@dataclass
class IngestResult:
    corpus: AnalyzedCorpus
    triples: list
    concepts: list[Concept]
    relations: list[tuple[int, int, str]]
    normalization: dict
    dim: int


def _dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_references(path) -> list[list[str]]:
    """Reference summaries as token lists; accepts a JSON list of strings."""
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("references", [])
    return [list(tokenize(str(text))) for text in data]


def ingest_corpus(
    corpus: Corpus,
    store: VectorStore,
    tau: float = 0.9,
    preextracted: list[dict] | None = None,
) -> IngestResult:
    sentences: list[Sentence] = []
    for doc in corpus:
        sentences.extend(segment_and_tokenize(doc))

    raw = []
    for sent in sentences:
        if preextracted is not None:
            raw.extend(
                extract_triples(sent, mode="preextracted", external=preextracted)
            )
        else:
            raw.extend(extract_triples(sent))
    normalized, stats = normalize_mentions(raw, sentences)

    mentions = []
    for t in normalized:
        mentions.append((t.doc_id, t.sent_index, t.subject))
        mentions.append((t.doc_id, t.sent_index, t.object))
    concepts = group_mentions(mentions, store)

    by_mention: dict[tuple, int] = {}
    for c in concepts:
        for m in c.mentions:
            by_mention[m] = c.id
    relations: list[tuple[int, int, str]] = []
    seen = set()
    for t in normalized:
        src = by_mention.get((t.doc_id, t.sent_index, tuple(t.subject)))
        dst = by_mention.get((t.doc_id, t.sent_index, tuple(t.object)))
        if src is None or dst is None or src == dst:
            continue
        key = (src, dst, " ".join(t.relation))
        if key in seen:
            continue
        seen.add(key)
        relations.append(key)

    return IngestResult(
        corpus=AnalyzedCorpus(
            documents=[doc.id for doc in corpus], sentences=sentences
        ),
        triples=normalized,
        concepts=concepts,
        relations=relations,
        normalization=vars(stats).copy(),
        dim=store.dim,
    )


def save_triples(triples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in triples:
            fh.write(
                json.dumps(
                    {
                        "subject": list(t.subject),
                        "relation": list(t.relation),
                        "object": list(t.object),
                        "doc_id": t.doc_id,
                        "sent_index": t.sent_index,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def save_concepts(result: IngestResult, path) -> None:
    payload = {
        "dim": result.dim,
        "documents": result.corpus.documents,
        "sentences": [
            {"doc_id": s.doc_id, "index": s.index, "tokens": list(s.tokens)}
            for s in result.corpus.sentences
        ],
        "concepts": [
            {
                "id": c.id,
                "label": c.canonical_label,
                "frequency": c.frequency,
                "merge_count": c.merge_count,
                "vector": [float(x) for x in c.vector],
                "mentions": [
                    [doc_id, sent_index, list(tokens)]
                    for doc_id, sent_index, tokens in c.mentions
                ],
            }
            for c in result.concepts
        ],
        "relations": [[src, dst, phrase] for src, dst, phrase in result.relations],
        "normalization": result.normalization,
    }
    _dump_json(payload, path)


def load_concepts(path) -> IngestResult:
    data = _load_json(path)
    sentences = [
        Sentence(
            doc_id=s["doc_id"], index=int(s["index"]),
            tokens=tuple(s["tokens"]), raw=""
        )
        for s in data["sentences"]
    ]
    concepts = [
        Concept(
            id=int(c["id"]),
            canonical_label=c["label"],
            mentions=[(m[0], int(m[1]), tuple(m[2])) for m in c["mentions"]],
            vector=np.array(c["vector"], dtype=float),
            frequency=int(c["frequency"]),
            merge_count=int(c["merge_count"]),
        )
        for c in data["concepts"]
    ]
    relations = [(int(r[0]), int(r[1]), r[2]) for r in data["relations"]]
    return IngestResult(
        corpus=AnalyzedCorpus(documents=list(data["documents"]), sentences=sentences),
        triples=[],
        concepts=concepts,
        relations=relations,
        normalization=dict(data.get("normalization", {})),
        dim=int(data["dim"]),
    )


def resolve_vectors(
    corpus: Corpus,
    vectors_path=None,
    dim: int = 50,
    seed: int = 0,
    epochs: int = 3,
) -> VectorStore:
    """Load pretrained vectors when given, else train on the corpus."""
    if vectors_path is not None:
        return load_vectors(vectors_path)
    return train_embeddings(corpus, dim=dim, epochs=epochs, seed=seed)


def run_ingest(
    corpus_path,
    out_dir,
    vectors_path=None,
    triples_path=None,
    tau: float = 0.9,
    dim: int = 50,
    seed: int = 0,
) -> IngestResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(corpus_path)
    store = resolve_vectors(corpus, vectors_path, dim=dim, seed=seed)
    pre = load_preextracted(triples_path) if triples_path else None
    result = ingest_corpus(corpus, store, tau=tau, preextracted=pre)
    save_triples(result.triples, out / "triples.jsonl")
    save_concepts(result, out / "concepts.json")
    return result


def run_build(
    concepts_path,
    out_dir,
    k_range=(2, 5),
    alpha: float = 0.1,
    min_node_size: int = 2,
    max_depth: int = 4,
    seed: int = 0,
) -> HierarchyNode:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = load_concepts(concepts_path)
    params = HierarchyParams(
        k_range=tuple(k_range),
        alpha=alpha,
        min_node_size=min_node_size,
        max_depth=max_depth,
        seed=seed,
    )
    tree = build_hierarchy(result.concepts, params)
    _dump_json(
        hierarchy_to_json(tree, result.concepts, include_centers=True),
        out / "hierarchy.json",
    )
    return tree


def make_phi_lookup(stats: CorpusStats, set_size: int):
    ids, matrix = phi_matrix(stats, set_size)
    rows = {cid: matrix[i] for i, cid in enumerate(ids)}

    def lookup(concept_id: int) -> np.ndarray:
        return rows[concept_id]

    return lookup, set_size


@dataclass
class TrainingResult:
    model: UtilityModel
    ranking_rank: dict[int, int]
    ranking_utility: dict[int, float]
    records: list[PreferenceRecord]
    stats: CorpusStats
    set_size: int


def run_preference_loop(
    hierarchy: HierarchyNode,
    concepts: list[Concept],
    stats: CorpusStats,
    references: list[list[str]],
    query_budget: int = 40,
    strategy: str = "chain",
    set_size: int = 10,
    lr: float = 0.05,
    epochs: int = 200,
    seed: int = 0,
    l2: float = 1e-4,
    round_size: int = 5,
) -> TrainingResult:
    """Schedule queries in rounds, answer with the simulated oracle, retrain."""
    lookup, _ = make_phi_lookup(stats, set_size)
    schema = FULL_SCHEMA[:set_size]
    oracle = simulated_oracle(references, concepts)
    records: list[PreferenceRecord] = []
    asked: list[QueryPair] = []
    model = UtilityModel(weights=np.zeros(set_size), schema=schema)
    round_no = 0
    while len(records) < query_budget:
        want = min(round_size, query_budget - len(records))
        pairs = schedule_queries(
            hierarchy,
            want,
            strategy=strategy,
            model=model,
            phi_lookup=lookup,
            exclude=asked,
            start_round=round_no,
        )
        if not pairs:
            break
        for pair in pairs:
            records.append(PreferenceRecord(pair=pair, choice=oracle(pair)))
        asked.extend(pairs)
        model = train_utility(
            records, lookup, schema, lr=lr, epochs=epochs, seed=seed, l2=l2
        )
        round_no += 1

    labels = selectable_concepts(hierarchy)
    table = rank_concepts(model, labels, lookup)
    return TrainingResult(
        model=model,
        ranking_rank=table.rank,
        ranking_utility=table.utility,
        records=records,
        stats=stats,
        set_size=set_size,
    )


def save_training(result: TrainingResult, concepts, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(
        {
            "weights": [float(w) for w in result.model.weights],
            "schema": list(result.model.schema),
            "trained_rounds": result.model.trained_rounds,
            "set_size": result.set_size,
        },
        out / "utility.json",
    )
    _dump_json(
        {
            "rank": {str(k): v for k, v in result.ranking_rank.items()},
            "utility": {str(k): float(v) for k, v in result.ranking_utility.items()},
        },
        out / "ranking.json",
    )
    ids, matrix = phi_matrix(result.stats, 10)
    _dump_json(
        {
            "schema": list(FULL_SCHEMA),
            "concepts": {
                str(cid): [float(x) for x in matrix[i]] for i, cid in enumerate(ids)
            },
        },
        out / "features.json",
    )
    with open(out / "stats.tsv", "w", encoding="utf-8") as fh:
        fh.write(stats_to_tsv(result.stats, concepts))
    with open(out / "preferences.jsonl", "w", encoding="utf-8") as fh:
        for rec in result.records:
            fh.write(
                json.dumps(
                    {
                        "round": rec.pair.round,
                        "level": rec.pair.level,
                        "left": rec.pair.left,
                        "right": rec.pair.right,
                        "choice": rec.choice,
                        "timestamp": "",
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_ranking(path):
    data = _load_json(path)
    rank = {int(k): int(v) for k, v in data["rank"].items()}
    utility = {int(k): float(v) for k, v in data["utility"].items()}
    from .preference import RankingTable

    return RankingTable(rank=rank, utility=utility)


def load_feature_lookup(path, set_size: int = 10):
    data = _load_json(path)
    rows = {int(k): np.array(v[:set_size], dtype=float)
            for k, v in data["concepts"].items()}

    def lookup(concept_id: int) -> np.ndarray:
        return rows[concept_id]

    return lookup, set_size


def run_train(
    concepts_path,
    hierarchy_path,
    references_path,
    out_dir,
    query_budget: int = 40,
    strategy: str = "chain",
    set_size: int = 10,
    lr: float = 0.05,
    epochs: int = 200,
    seed: int = 0,
    l2: float = 1e-4,
) -> TrainingResult:
    result = load_concepts(concepts_path)
    hierarchy = hierarchy_from_json(_load_json(hierarchy_path))
    references = load_references(references_path)
    stats = compute_stats(result.corpus, result.concepts)
    training = run_preference_loop(
        hierarchy,
        result.concepts,
        stats,
        references,
        query_budget=query_budget,
        strategy=strategy,
        set_size=set_size,
        lr=lr,
        epochs=epochs,
        seed=seed,
        l2=l2,
    )
    save_training(training, result.concepts, out_dir)
    return training


def run_summarize(
    concepts_path,
    hierarchy_path,
    ranking_path,
    features_path,
    out_dir,
    budget: int = 10,
    set_size: int = 10,
    episodes: int = 1000,
    lr: float = 0.02,
    seed: int = 0,
):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = load_concepts(concepts_path)
    hierarchy = hierarchy_from_json(_load_json(hierarchy_path))
    ranking = load_ranking(ranking_path)
    lookup, dim = load_feature_lookup(features_path, set_size)
    policy = train_td(
        hierarchy,
        ranking,
        lookup,
        phi_dim=dim,
        budget=budget,
        lr=lr,
        episodes=episodes,
        seed=seed,
    )
    summary = generate_summary(
        hierarchy,
        policy,
        ranking,
        budget,
        lookup,
        dim,
        concepts=result.concepts,
        relations=result.relations,
    )
    _dump_json(
        {
            "value_weights": [float(w) for w in policy.value_weights],
            "hyper": policy.hyper,
        },
        out / "policy.json",
    )
    _dump_json(summary_to_json(summary, seed=seed, set_size=set_size),
               out / "summary.json")
    return summary


def summary_to_json(summary, seed: int, set_size: int) -> dict:
    return {
        "concepts": summary.concepts,
        "relations": summary.relations,
        "reward": summary.reward,
        "rank_sum": summary.rank_sum,
        "budget": summary.budget,
        "seed": seed,
        "set_size": set_size,
    }


def summary_tokens(summary_concepts) -> list[str]:
    """Flatten selected concept labels into the scoring token stream."""
    tokens: list[str] = []
    for row in summary_concepts:
        tokens.extend(tokenize(row["label"]))
    return tokens


def score_summary(summary_concepts, references, word_limit: int | None = 75):
    cand = summary_tokens(summary_concepts)
    return {
        variant: rouge_score(cand, references, variant, word_limit=word_limit)
        for variant in ("R1", "R2", "RL")
    }


def run_eval(summary_path, references_path, out_dir, word_limit: int = 75):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = _load_json(summary_path)
    references = load_references(references_path)
    scores = score_summary(summary["concepts"], references, word_limit=word_limit)
    lines = ["variant\trecall\tprecision\tf1"]
    for variant in ("R1", "R2", "RL"):
        s = scores[variant]
        lines.append(
            f"{variant}\t{s.recall:.6f}\t{s.precision:.6f}\t{s.f1:.6f}"
        )
    with open(out / "rouge.tsv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    from .report import plot_rouge_bars

    plot_rouge_bars(scores, out / "rouge.png")
    return scores


def _sweep_common(concepts_path, hierarchy_path, references_path):
    result = load_concepts(concepts_path)
    hierarchy = hierarchy_from_json(_load_json(hierarchy_path))
    references = load_references(references_path)
    stats = compute_stats(result.corpus, result.concepts)
    return result, hierarchy, references, stats


def run_budget_sweep(
    concepts_path,
    hierarchy_path,
    references_path,
    out_dir,
    budgets=(10, 15, 20, 25, 30, 35),
    set_size: int = 10,
    query_budget: int = 40,
    episodes: int = 1000,
    seed: int = 0,
    word_limit: int = 75,
):
    """One summary per budget with a shared ranking; scores into TSV + figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result, hierarchy, references, stats = _sweep_common(
        concepts_path, hierarchy_path, references_path
    )
    training = run_preference_loop(
        hierarchy, result.concepts, stats, references,
        query_budget=query_budget, set_size=set_size, seed=seed,
    )
    lookup, dim = make_phi_lookup(stats, set_size)
    from .preference import RankingTable

    ranking = RankingTable(rank=training.ranking_rank, utility=training.ranking_utility)
    rows = []
    for budget in budgets:
        policy = train_td(
            hierarchy, ranking, lookup, phi_dim=dim, budget=budget,
            episodes=episodes, seed=seed,
        )
        summary = generate_summary(
            hierarchy, policy, ranking, budget, lookup, dim,
            concepts=result.concepts, relations=result.relations,
        )
        scores = score_summary(summary.concepts, references, word_limit=word_limit)
        rows.append(
            {
                "budget": budget,
                "selected": len(summary.concepts),
                "r1_recall": scores["R1"].recall,
                "r2_recall": scores["R2"].recall,
                "rl_recall": scores["RL"].recall,
                "reward": summary.reward,
                "rank_sum": summary.rank_sum,
            }
        )
    header = "budget\tselected\tr1_recall\tr2_recall\trl_recall\treward\trank_sum"
    lines = [header] + [
        "\t".join(
            [
                str(r["budget"]),
                str(r["selected"]),
                f"{r['r1_recall']:.6f}",
                f"{r['r2_recall']:.6f}",
                f"{r['rl_recall']:.6f}",
                f"{r['reward']:.6f}",
                str(r["rank_sum"]),
            ]
        )
        for r in rows
    ]
    with open(out / "budget_sweep.tsv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    from .report import plot_budget_curve

    plot_budget_curve(rows, out / "budget_sweep.png")
    return rows


def run_feature_sweep(
    concepts_path,
    hierarchy_path,
    references_path,
    out_dir,
    set_sizes=(2, 5, 8, 10),
    seeds=(0, 1, 2, 3, 4),
    budget: int = 10,
    query_budget: int = 40,
    episodes: int = 1000,
    word_limit: int = 75,
):
    """R1 recall per feature-set size, averaged over seeds."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result, hierarchy, references, stats = _sweep_common(
        concepts_path, hierarchy_path, references_path
    )
    rows = []
    for set_size in set_sizes:
        for seed in seeds:
            training = run_preference_loop(
                hierarchy, result.concepts, stats, references,
                query_budget=query_budget, set_size=set_size, seed=seed,
            )
            lookup, dim = make_phi_lookup(stats, set_size)
            from .preference import RankingTable

            ranking = RankingTable(
                rank=training.ranking_rank, utility=training.ranking_utility
            )
            policy = train_td(
                hierarchy, ranking, lookup, phi_dim=dim, budget=budget,
                episodes=episodes, seed=seed,
            )
            summary = generate_summary(
                hierarchy, policy, ranking, budget, lookup, dim,
                concepts=result.concepts, relations=result.relations,
            )
            scores = score_summary(
                summary.concepts, references, word_limit=word_limit
            )
            rows.append(
                {
                    "set_size": set_size,
                    "seed": seed,
                    "r1_recall": scores["R1"].recall,
                }
            )
    lines = ["set_size\tseed\tr1_recall"] + [
        f"{r['set_size']}\t{r['seed']}\t{r['r1_recall']:.6f}" for r in rows
    ]
    with open(out / "feature_sweep.tsv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    from .report import plot_feature_curve

    plot_feature_curve(rows, out / "feature_sweep.png")
    return rows
