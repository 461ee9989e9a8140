"""Built-in demo corpus: twelve short news-style documents on three topics.

Sentences are deliberately plain subject-verb-object so the heuristic
extractor recovers the intended concepts. The companion vector fixture
places each content word near its topic anchor, giving the hierarchy
three clean top-level branches; singular/plural variants of a few
concepts share noise so stage-2 merging has real work to do.

Everything here is deterministic: same seed, same bytes.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

import numpy as np

from .embedding import VectorStore, save_vectors
from .ingest import FUNCTION_WORDS, tokenize

VECTOR_DIM = 32

_DOCS = [
    ("a1", "Pharmaceutical Benefits Scheme", [
        "The Pharmaceutical Benefits Scheme funds cancer treatment.",
        "Cancer treatment includes chemotherapy.",
        "The scheme offers drug subsidies.",
        "Drug subsidies lower treatment costs.",
        "The National Cancer Registry tracks cancer treatment.",
    ]),
    ("a2", "Cancer screening", [
        "Screening programs find early cancers.",
        "The National Cancer Registry guides the screening programs.",
        "Screening programs serve rural patients.",
        "Rural patients need drug subsidies.",
        "Clinical trials improve cancer treatment.",
    ]),
    ("a3", "Chemotherapy access", [
        "Chemotherapy requires steady funding.",
        "The Pharmaceutical Benefits Scheme covers chemotherapy.",
        "Cancer treatment is underpinned by the Pharmaceutical Benefits Scheme.",
        "Clinical trials measure chemotherapy.",
        "Drug subsidies help rural patients.",
    ]),
    ("a4", "Registry report", [
        "The National Cancer Registry tracks the screening program.",
        "The registry tracks incidence rates.",
        "Screening programs reduce treatment costs.",
        "The Pharmaceutical Benefits Scheme supports clinical trials.",
        "Chemotherapy helps rural patients.",
    ]),
    ("b1", "Solar Futures Initiative", [
        "The Solar Futures Initiative expands solar panels.",
        "Solar panels reduce electricity prices.",
        "The initiative funds grid batteries.",
        "Grid batteries boost storage capacity.",
        "Rooftop installations increase renewable output.",
    ]),
    ("b2", "Grid storage", [
        "Grid batteries prevent power outages.",
        "Power outages affect electricity prices.",
        "The Solar Futures Initiative promotes rooftop installations.",
        "Storage capacity supports renewable output.",
        "A grid battery holds spare power.",
    ]),
    ("b3", "Rooftop solar", [
        "Rooftop installations use solar panels.",
        "Solar panels need storage capacity.",
        "The initiative offers panel rebates.",
        "Renewable output reduces power outages.",
        "The Solar Futures Initiative guides grid batteries.",
    ]),
    ("b4", "Electricity prices", [
        "Electricity prices affect rooftop installations.",
        "Grid batteries ease electricity prices.",
        "The Solar Futures Initiative measures renewable output.",
        "Storage capacity requires grid batteries.",
        "Solar panels serve coastal towns.",
    ]),
    ("c1", "Great Barrier Reef", [
        "The Great Barrier Reef shows coral bleaching.",
        "Ocean temperatures cause coral bleaching.",
        "The Marine Park Authority tracks coral bleaching.",
        "Tourism operators monitor water quality.",
        "Diver surveys measure fish populations.",
    ]),
    ("c2", "Bleaching response", [
        "Coral bleaching affects tourism operators.",
        "The Marine Park Authority funds diver surveys.",
        "Diver surveys track ocean temperatures.",
        "Water quality affects fish populations.",
        "The authority protects seagrass meadows.",
    ]),
    ("c3", "Ocean warming", [
        "Ocean temperatures affect the Great Barrier Reef.",
        "Summer heatwaves cause coral bleaching.",
        "The Marine Park Authority measures ocean temperatures.",
        "Fish populations require water quality.",
        "Tourism operators support diver surveys.",
    ]),
    ("c4", "Reef economy", [
        "Tourism operators serve the Great Barrier Reef.",
        "Coral bleaching reduces fish populations.",
        "The Marine Park Authority guides tourism operators.",
        "Water quality shapes lagoon health.",
        "The Great Barrier Reef remains a treasured icon.",
    ]),
]

# Three annotator-style summaries of the whole corpus. Each covers all
# three topics so recall rewards coverage rather than picking one topic.
_REFERENCES = [
    "The Pharmaceutical Benefits Scheme funds drug subsidies, and the "
    "National Cancer Registry guides screening programs. The Solar "
    "Futures Initiative expands solar panels, rooftop installations and "
    "grid batteries, cutting electricity prices. The Marine Park "
    "Authority funds diver surveys as ocean temperatures stress the "
    "Great Barrier Reef.",
    "The Solar Futures Initiative adds storage capacity and grid "
    "batteries to prevent power outages. Drug subsidies under the "
    "Pharmaceutical Benefits Scheme help rural patients, and the "
    "National Cancer Registry tracks screening programs. Diver surveys "
    "for the Marine Park Authority show coral bleaching across the "
    "Great Barrier Reef.",
    "The Great Barrier Reef faces rising ocean temperatures, so the "
    "Marine Park Authority expands diver surveys. The Solar Futures "
    "Initiative backs rooftop installations, solar panels and storage "
    "capacity against power outages and electricity prices. The "
    "National Cancer Registry and the Pharmaceutical Benefits Scheme "
    "widen drug subsidies and screening programs.",
]

# Singular/plural variants share a noise vector so their concepts land
# within merging distance of each other.
_SHARED_NOISE = {
    "battery": "batteries",
    "program": "programs",
}

# Short anaphoric mentions ("the registry") whose noise blends from the
# full name's words, keeping them within merging distance of it.
_NOISE_BLENDS = {
    "registry": ("national", "cancer"),
}


def toy_documents() -> list[dict]:
    return [
        {"id": doc_id, "title": title, "text": " ".join(sentences)}
        for doc_id, title, sentences in _DOCS
    ]


def toy_references() -> list[str]:
    return list(_REFERENCES)


def _topic_of_doc(doc_id: str) -> str:
    return doc_id[0]


def toy_vector_entries(dim: int = VECTOR_DIM, seed: int = 7) -> dict[str, np.ndarray]:
    """Word vectors keyed by lowercase token, topic-anchored plus noise."""
    topics = {"a": 0, "b": 1, "c": 2}
    bases = {}
    block = max(dim // 3, 1)
    for topic, idx in topics.items():
        base = np.zeros(dim)
        base[idx * block : (idx + 1) * block] = 1.0
        # Fixed anchor norm regardless of dim, so the noise-to-anchor
        # ratio (and with it the merge margin) stays put.
        bases[topic] = base * np.sqrt(5.0 / block)

    word_topics: dict[str, set[str]] = {}
    for doc_id, title, sentences in _DOCS:
        topic = _topic_of_doc(doc_id)
        for raw in [title] + sentences:
            for tok in tokenize(raw):
                word_topics.setdefault(tok.lower(), set()).add(topic)
    for raw in _REFERENCES:
        for tok in tokenize(raw):
            word_topics.setdefault(tok.lower(), set())

    # Per-word RNG seeding keeps every vector fixed under vocabulary
    # edits elsewhere in the corpus.
    def word_rng(word: str) -> np.random.Generator:
        return np.random.default_rng((seed, zlib.crc32(word.encode("utf-8"))))

    noise: dict[str, np.ndarray] = {}
    for word in sorted(word_topics):
        if word in _SHARED_NOISE.values():
            continue  # filled from its singular partner below
        noise[word] = word_rng(word).standard_normal(dim)
    for singular, plural in _SHARED_NOISE.items():
        base_noise = noise.get(singular)
        if base_noise is None:
            base_noise = word_rng(singular).standard_normal(dim)
            noise[singular] = base_noise
        noise[plural] = base_noise + 0.02 * word_rng(plural).standard_normal(dim)
    for word, partners in _NOISE_BLENDS.items():
        parts = [noise[p] for p in partners]
        noise[word] = sum(parts) / np.sqrt(len(parts))

    entries: dict[str, np.ndarray] = {}
    for word, topics_seen in sorted(word_topics.items()):
        if word in FUNCTION_WORDS:
            entries[word] = 0.05 * noise[word] / np.sqrt(dim)
        elif len(topics_seen) == 1:
            topic = next(iter(topics_seen))
            entries[word] = bases[topic] + 3.0 * noise[word] / np.sqrt(dim)
        else:
            entries[word] = 0.5 * noise[word] / np.sqrt(dim)
    return entries


def toy_vector_store(dim: int = VECTOR_DIM, seed: int = 7) -> VectorStore:
    return VectorStore(dim=dim, entries=toy_vector_entries(dim, seed))


def write_toy_workspace(directory, dim: int = VECTOR_DIM, seed: int = 7) -> dict:
    """Write corpus.jsonl, vectors.vec and references.json; return the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpus_path = directory / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in toy_documents():
            fh.write(json.dumps(doc, sort_keys=True) + "\n")
    vectors_path = directory / "vectors.vec"
    save_vectors(toy_vector_store(dim, seed), vectors_path)
    references_path = directory / "references.json"
    with open(references_path, "w", encoding="utf-8") as fh:
        json.dump(toy_references(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {
        "corpus": str(corpus_path),
        "vectors": str(vectors_path),
        "references": str(references_path),
    }
