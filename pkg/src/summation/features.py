"""Per-concept surface statistics and the feature vector phi.

All statistics are computed once over the corpus and held immutable.
phi draws on them with a fixed importance ordering so the set sizes
2, 5, 8 and 10 are prefixes of one another. Features are z-normalized
per feature across all concepts; a variance floor keeps degenerate
features at zero instead of exploding.

Two features have no precise published definition and are stand-ins:
"gain" uses the KL-style p * log(p / p_bg) with a uniform background
over the concept vocabulary, and "signature" applies a two-sample
binomial log-likelihood-ratio test of the concept's sentence rate in
the documents containing it against the remaining documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embedding import similarity
from .errors import UnknownSetSizeError

# 95th percentile of chi-squared with one degree of freedom.
CHI2_95_DF1 = 3.841458820694124

VARIANCE_FLOOR = 1e-8

FULL_SCHEMA = (
    "tf_idf",
    "signature",
    "tf_idf_centroid_sim",
    "named_entity",
    "cooccurrence_degree",
    "gain",
    "ridf",
    "uppercase_ratio",
    "merge_count",
    "mean_edge_weight",
)

SET_SIZES = (2, 5, 8, 10)


@dataclass
class CorpusStats:
    """Raw per-concept statistics plus the symmetric co-occurrence counts."""

    tf_idf: dict[int, float]
    ridf: dict[int, float]
    gain: dict[int, float]
    signature: dict[int, int]
    named_entity: dict[int, int]
    uppercase_ratio: dict[int, float]
    cooccurrence: dict[tuple[int, int], int]
    degree: dict[int, int]
    mean_edge_weight: dict[int, float]
    merge_count: dict[int, int]
    merge_flag: dict[int, int]
    centroid_sim: dict[int, float]
    _zcache: dict | None = field(default=None, repr=False, compare=False)

    def cooccurrence_count(self, a: int, b: int) -> int:
        if a == b:
            return 0
        return self.cooccurrence.get((min(a, b), max(a, b)), 0)

    def raw_row(self, concept_id: int) -> np.ndarray:
        return np.array(
            [
                self.tf_idf[concept_id],
                float(self.signature[concept_id]),
                self.tf_idf[concept_id] * self.centroid_sim[concept_id],
                float(self.named_entity[concept_id]),
                float(self.degree[concept_id]),
                self.gain[concept_id],
                self.ridf[concept_id],
                self.uppercase_ratio[concept_id],
                float(self.merge_count[concept_id]),
                self.mean_edge_weight[concept_id],
            ]
        )


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    schema: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise ValueError("values and schema lengths differ")


def _safe_ll(k: float, n: float, p: float) -> float:
    # Binomial log-likelihood with the 0*log(0) = 0 convention.
    out = 0.0
    if k > 0:
        out += k * math.log(p)
    if n - k > 0:
        out += (n - k) * math.log(1.0 - p)
    return out


def log_likelihood_ratio(k1: int, n1: int, k2: int, n2: int) -> float:
    """-2 log lambda for equal vs separate binomial rates."""
    if n1 <= 0:
        return 0.0
    total_n = n1 + n2
    p = (k1 + k2) / total_n
    if p <= 0 or p >= 1:
        return 0.0
    p1 = k1 / n1
    p2 = k2 / n2 if n2 > 0 else 0.0
    return 2.0 * (
        _safe_ll(k1, n1, p1)
        + _safe_ll(k2, n2, p2)
        - _safe_ll(k1, n1, p)
        - _safe_ll(k2, n2, p)
    )


def _is_capitalized(token: str) -> bool:
    for ch in token:
        if ch.isalpha():
            return ch.isupper()
    return False


def _locate_span(span: tuple[str, ...], sentence_tokens: list[str]) -> int | None:
    m = len(span)
    for start in range(len(sentence_tokens) - m + 1):
        if tuple(sentence_tokens[start : start + m]) == span:
            return start
    return None


def compute_stats(corpus, concepts, hierarchy=None) -> CorpusStats:
    """Compute every per-concept statistic in one pass.

    ``hierarchy`` is accepted for interface parity but unused: degree and
    edge weights come from the sentence-level co-occurrence graph, with
    edge weight the cosine between the endpoint concept vectors.
    """
    n_docs = len(corpus.documents)
    sentences_by_doc: dict[str, int] = {}
    sentence_tokens: dict[tuple[str, int], list[str]] = {}
    for sent in corpus.sentences:
        sentences_by_doc[sent.doc_id] = sentences_by_doc.get(sent.doc_id, 0) + 1
        sentence_tokens[(sent.doc_id, sent.index)] = sent.tokens
    total_sentences = sum(sentences_by_doc.values())

    cf: dict[int, int] = {}
    docs_of: dict[int, set[str]] = {}
    sents_of: dict[int, set[tuple[str, int]]] = {}
    for c in concepts:
        cf[c.id] = len(c.mentions)
        docs_of[c.id] = {doc_id for doc_id, _, _ in c.mentions}
        sents_of[c.id] = {(doc_id, idx) for doc_id, idx, _ in c.mentions}

    total_cf = sum(cf.values())
    p_bg = 1.0 / len(concepts) if concepts else 1.0

    tf_idf, ridf, gain = {}, {}, {}
    signature, named_entity, uppercase_ratio = {}, {}, {}
    for c in concepts:
        df = len(docs_of[c.id])
        tf = cf[c.id] / n_docs
        tf_idf[c.id] = tf * math.log(n_docs / df)
        ridf[c.id] = math.log(n_docs / df) + math.log(1.0 - math.exp(-tf))
        p = cf[c.id] / total_cf if total_cf else 0.0
        gain[c.id] = p * math.log(p / p_bg) if p > 0 else 0.0

        fg_sents = sum(sentences_by_doc.get(d, 0) for d in docs_of[c.id])
        k1 = len(sents_of[c.id])
        llr = log_likelihood_ratio(k1, fg_sents, 0, total_sentences - fg_sents)
        signature[c.id] = 1 if llr > CHI2_95_DF1 else 0

        caps = 0
        toks = 0
        violations = 0
        evidence = 0
        for doc_id, idx, tokens in c.mentions:
            sent = sentence_tokens.get((doc_id, idx), [])
            start = _locate_span(tuple(tokens), sent)
            for offset, tok in enumerate(tokens):
                toks += 1
                if _is_capitalized(tok):
                    caps += 1
                pos = None if start is None else start + offset
                if pos == 0:
                    continue  # sentence-initial caps prove nothing
                evidence += 1
                if not _is_capitalized(tok):
                    violations += 1
        uppercase_ratio[c.id] = caps / toks if toks else 0.0
        named_entity[c.id] = 1 if evidence > 0 and violations == 0 else 0

    cooccurrence: dict[tuple[int, int], int] = {}
    ordered = sorted(c.id for c in concepts)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            shared = len(sents_of[a] & sents_of[b])
            if shared:
                cooccurrence[(a, b)] = shared

    vectors = {c.id: np.asarray(c.vector, dtype=float) for c in concepts}
    degree, mean_edge_weight = {}, {}
    for c in concepts:
        neighbors = [
            other
            for other in ordered
            if other != c.id
            and cooccurrence.get((min(c.id, other), max(c.id, other)), 0) > 0
        ]
        degree[c.id] = len(neighbors)
        if neighbors:
            weights = [
                similarity(vectors[c.id], vectors[n], kind="cosine")
                for n in neighbors
            ]
            mean_edge_weight[c.id] = float(np.mean(weights))
        else:
            mean_edge_weight[c.id] = 0.0

    centroid = np.mean([vectors[c.id] for c in concepts], axis=0)
    centroid_sim = {
        c.id: similarity(vectors[c.id], centroid, kind="cosine") for c in concepts
    }
    merge_count = {c.id: int(c.merge_count) for c in concepts}
    merge_flag = {c.id: 1 if c.merge_count > 0 else 0 for c in concepts}

    return CorpusStats(
        tf_idf=tf_idf,
        ridf=ridf,
        gain=gain,
        signature=signature,
        named_entity=named_entity,
        uppercase_ratio=uppercase_ratio,
        cooccurrence=cooccurrence,
        degree=degree,
        mean_edge_weight=mean_edge_weight,
        merge_count=merge_count,
        merge_flag=merge_flag,
        centroid_sim=centroid_sim,
    )


def _zmatrix(stats: CorpusStats):
    if stats._zcache is None:
        ids = sorted(stats.tf_idf)
        raw = np.array([stats.raw_row(cid) for cid in ids])
        mean = raw.mean(axis=0)
        var = raw.var(axis=0)
        sigma = np.sqrt(np.maximum(var, VARIANCE_FLOOR))
        z = (raw - mean) / sigma
        stats._zcache = {"ids": {cid: i for i, cid in enumerate(ids)}, "z": z}
    return stats._zcache


def phi(concept_id: int, stats: CorpusStats, set_size: int = 10) -> FeatureVector:
    """Normalized feature vector for one concept, truncated to set_size."""
    if set_size not in SET_SIZES:
        raise UnknownSetSizeError(
            f"set_size {set_size} not in {sorted(SET_SIZES)}"
        )
    cache = _zmatrix(stats)
    row = cache["z"][cache["ids"][concept_id]]
    return FeatureVector(
        values=row[:set_size].copy(), schema=FULL_SCHEMA[:set_size]
    )


def phi_matrix(stats: CorpusStats, set_size: int = 10):
    """All concepts' phi rows at once: (sorted ids, matrix)."""
    if set_size not in SET_SIZES:
        raise UnknownSetSizeError(
            f"set_size {set_size} not in {sorted(SET_SIZES)}"
        )
    cache = _zmatrix(stats)
    ids = sorted(cache["ids"], key=lambda cid: cache["ids"][cid])
    return ids, cache["z"][:, :set_size].copy()


def stats_to_tsv(stats: CorpusStats, concepts) -> str:
    """Raw statistics table, one row per concept, for debugging dumps."""
    by_id = {c.id: c for c in concepts}
    header = ["concept_id", "label"] + list(FULL_SCHEMA)
    lines = ["\t".join(header)]
    for cid in sorted(stats.tf_idf):
        row = stats.raw_row(cid)
        label = by_id[cid].canonical_label if cid in by_id else ""
        cells = [str(cid), label] + [f"{v:.6f}" for v in row]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
