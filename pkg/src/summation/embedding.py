"""Word vectors: loading, minimal training, concept vectors, similarity.

The trainer is a small skip-gram-with-negative-sampling implementation
where a word's vector is the sum of its character n-gram vectors plus a
whole-word vector, so rare and unseen words can be backed off to their
n-grams. It exists so the repo runs offline end to end; loading
pretrained vectors in the plain text format is the recommended path for
real corpora.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatchError, EmptyStoreError, InsufficientDataError
from .ingest import Corpus, segment_and_tokenize


@dataclass
class VectorStore:
    """Immutable-after-construction token -> vector map.

    ``ngrams`` holds character n-gram vectors when the store was produced
    by :func:`train_embeddings`; loaded stores leave it empty.
    """

    dim: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)
    ngrams: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.entries)

    def lookup(self, token: str) -> np.ndarray | None:
        vec = self.entries.get(token)
        if vec is None:
            vec = self.entries.get(token.lower())
        return vec

    def ngram_backoff(self, token: str) -> np.ndarray | None:
        """Sum of known character n-gram vectors for an OOV token."""
        if not self.ngrams:
            return None
        total = np.zeros(self.dim)
        hit = False
        for gram in _char_ngrams(token.lower(), self._ngram_range):
            vec = self.ngrams.get(gram)
            if vec is not None:
                total += vec
                hit = True
        return total if hit else None

    _ngram_range: range = range(3, 6)


def load_vectors(path) -> VectorStore:
    """Parse a ``.vec``-style text file: optional "count dim" header, then
    one "token v1 ... vd" line per word. First occurrence wins."""
    entries: dict[str, np.ndarray] = {}
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            token, values = parts[0], parts[1:]
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise DimMismatchError(
                    f"non-numeric vector value on line {lineno}", line=lineno
                ) from exc
            if dim is None:
                dim = len(vec)
                if dim == 0:
                    raise DimMismatchError(
                        f"no vector values on line {lineno}", line=lineno
                    )
            elif len(vec) != dim:
                raise DimMismatchError(
                    f"expected {dim} values, got {len(vec)} on line {lineno}",
                    line=lineno,
                )
            entries.setdefault(token, vec)
    if not entries:
        raise EmptyStoreError(f"no vectors in {path}")
    return VectorStore(dim=dim, entries=entries)


def save_vectors(store: VectorStore, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{store.count} {store.dim}\n")
        for token, vec in store.entries.items():
            vals = " ".join(f"{v:.6f}" for v in vec)
            fh.write(f"{token} {vals}\n")


def _char_ngrams(word: str, ngram_range: range) -> list[str]:
    wrapped = f"<{word}>"
    grams = []
    for n in ngram_range:
        for i in range(len(wrapped) - n + 1):
            grams.append(wrapped[i : i + n])
    return grams


def train_embeddings(
    corpus: Corpus,
    dim: int = 100,
    window: int = 5,
    epochs: int = 5,
    seed: int = 0,
    char_ngrams: range = range(3, 6),
    negatives: int = 5,
    lr: float = 0.05,
) -> VectorStore:
    """Train subword skip-gram vectors on a corpus, deterministically.

    Tokens are lowercased for the vocabulary. The returned store maps each
    vocabulary word to the sum of its n-gram vectors plus its whole-word
    vector, and keeps the n-gram table for OOV backoff.
    """
    if dim < 2:
        raise InsufficientDataError("embedding dim must be >= 2")
    sentences = []
    for doc in corpus:
        for sent in segment_and_tokenize(doc):
            toks = [t.lower() for t in sent.tokens]
            if len(toks) >= 2:
                sentences.append(toks)
    if not sentences:
        raise InsufficientDataError("corpus has no sentence with >= 2 tokens")

    counts: dict[str, int] = {}
    for toks in sentences:
        for t in toks:
            counts[t] = counts.get(t, 0) + 1
    vocab = sorted(counts)
    word_index = {w: i for i, w in enumerate(vocab)}

    gram_index: dict[str, int] = {}
    word_grams: list[list[int]] = []
    for w in vocab:
        ids = []
        for g in _char_ngrams(w, char_ngrams):
            if g not in gram_index:
                gram_index[g] = len(gram_index)
            ids.append(gram_index[g])
        word_grams.append(ids)

    rng = np.random.default_rng(seed)
    n_words, n_grams = len(vocab), len(gram_index)
    bound = 0.5 / dim
    word_in = rng.uniform(-bound, bound, size=(n_words, dim))
    gram_in = rng.uniform(-bound, bound, size=(n_grams, dim))
    word_out = np.zeros((n_words, dim))

    freqs = np.array([counts[w] for w in vocab], dtype=float) ** 0.75
    neg_table = freqs / freqs.sum()

    total_steps = max(1, epochs * sum(len(s) for s in sentences))
    step = 0
    for _ in range(epochs):
        for toks in sentences:
            ids = [word_index[t] for t in toks]
            for pos, center in enumerate(ids):
                step += 1
                alpha = lr * max(0.1, 1.0 - step / total_steps)
                grams = word_grams[center]
                h = word_in[center] + gram_in[grams].sum(axis=0)
                scale = 1.0 / (1 + len(grams))
                h = h * scale
                lo = max(0, pos - window)
                hi = min(len(ids), pos + window + 1)
                for cpos in range(lo, hi):
                    if cpos == pos:
                        continue
                    targets = [ids[cpos]]
                    labels = [1.0]
                    negs = rng.choice(n_words, size=negatives, p=neg_table)
                    for n_id in negs:
                        if n_id != ids[cpos]:
                            targets.append(int(n_id))
                            labels.append(0.0)
                    grad_h = np.zeros(dim)
                    for t_id, label in zip(targets, labels):
                        score = 1.0 / (1.0 + math.exp(-float(h @ word_out[t_id])))
                        g = alpha * (label - score)
                        grad_h += g * word_out[t_id]
                        word_out[t_id] += g * h
                    word_in[center] += grad_h * scale
                    gram_in[grams] += grad_h * scale

    entries = {}
    for w, idx in word_index.items():
        entries[w] = word_in[idx] + gram_in[word_grams[idx]].sum(axis=0)
    grams = {g: gram_in[i].copy() for g, i in gram_index.items()}
    store = VectorStore(dim=dim, entries=entries, ngrams=grams)
    store._ngram_range = char_ngrams
    return store


def embed_concept(
    concept_tokens, store: VectorStore
) -> tuple[np.ndarray, bool]:
    """Mean of in-vocabulary token vectors.

    OOV tokens back off to their character n-gram sum when the store has
    one, otherwise they are skipped. When nothing resolves the zero vector
    is returned with a False flag.
    """
    vecs = []
    for token in concept_tokens:
        vec = store.lookup(token)
        if vec is None:
            vec = store.ngram_backoff(token)
        if vec is not None:
            vecs.append(vec)
    if not vecs:
        return np.zeros(store.dim), False
    return np.mean(vecs, axis=0), True


def similarity(u, v, kind: str = "cosine") -> float:
    """Cosine over vectors or Jaccard over token sets."""
    if kind == "cosine":
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != v.shape:
            raise DimMismatchError(f"cosine dims differ: {u.shape} vs {v.shape}")
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0.0 or nv == 0.0:
            return 0.0
        return float(np.dot(u, v) / (nu * nv))
    if kind == "jaccard_tokens":
        su, sv = set(u), set(v)
        if not su and not sv:
            return 0.0
        return len(su & sv) / len(su | sv)
    raise ValueError(f"unknown similarity kind: {kind!r}")
