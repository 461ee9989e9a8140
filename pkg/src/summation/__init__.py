"""Interactive personalized multi-document summarization.

The pipeline turns a document cluster into a concept hierarchy, learns a
per-user utility over concepts from pairwise preference feedback, and
assembles a budgeted summary concept map with a learned selection policy.
"""

__version__ = "0.1.0"

from .embedding import VectorStore, load_vectors, save_vectors, train_embeddings
from .hierarchy import HierarchyNode, HierarchyParams, build_hierarchy, group_mentions
from .ingest import Corpus, load_corpus
from .policy import SummaryMdp, enumerate_summaries, generate_summary, train_td
from .preference import (
    PreferenceRecord,
    QueryPair,
    UtilityModel,
    rank_concepts,
    schedule_queries,
    simulated_oracle,
    train_utility,
)
from .rouge import RougeScore, rouge_score

__all__ = [
    "Corpus",
    "HierarchyNode",
    "HierarchyParams",
    "PreferenceRecord",
    "QueryPair",
    "RougeScore",
    "SummaryMdp",
    "UtilityModel",
    "VectorStore",
    "__version__",
    "build_hierarchy",
    "enumerate_summaries",
    "generate_summary",
    "group_mentions",
    "load_corpus",
    "load_vectors",
    "rank_concepts",
    "rouge_score",
    "save_vectors",
    "schedule_queries",
    "simulated_oracle",
    "train_embeddings",
    "train_td",
    "train_utility",
]
