"""Shared fixtures.

The bundled three-topic corpus is ingested and organized once per
session; most integration tests only read the resulting artifacts, so
building them a single time keeps the suite fast.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import pytest

from summation.features import CorpusStats, compute_stats
from summation.hierarchy import HierarchyNode
from summation.pipeline import (
    IngestResult,
    load_concepts,
    load_references,
    run_build,
    run_ingest,
)
from summation.toy import write_toy_workspace


@dataclass
class BuiltWorkspace:
    root: Path
    corpus_path: Path
    vectors_path: Path
    references_path: Path
    concepts_path: Path
    hierarchy_path: Path
    ingest: IngestResult
    hierarchy: HierarchyNode
    stats: CorpusStats
    references: list[list[str]]


@pytest.fixture(scope="session")
def built(tmp_path_factory) -> BuiltWorkspace:
    """Bundled corpus ingested and clustered with the CLI defaults."""
    root = tmp_path_factory.mktemp("workspace")
    data = root / "data"
    paths = write_toy_workspace(data)
    run_ingest(paths["corpus"], data, vectors_path=paths["vectors"])
    hierarchy = run_build(data / "concepts.json", data)
    ingest = load_concepts(data / "concepts.json")
    stats = compute_stats(ingest.corpus, ingest.concepts)
    references = load_references(paths["references"])
    return BuiltWorkspace(
        root=root,
        corpus_path=Path(paths["corpus"]),
        vectors_path=Path(paths["vectors"]),
        references_path=Path(paths["references"]),
        concepts_path=data / "concepts.json",
        hierarchy_path=data / "hierarchy.json",
        ingest=ingest,
        hierarchy=hierarchy,
        stats=stats,
        references=references,
    )


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
