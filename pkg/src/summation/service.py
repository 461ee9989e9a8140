"""HTTP session service for the interactive summarization loop.

Corpora are ingested and clustered in background threads; sessions then
serve pairwise preference queries, retrain the utility model every round
of feedback, and emit a policy-selected summary. Every session appends
to its own JSONL event log, and ``replay_session`` rebuilds the exact
model and summary from that log alone.

Configuration comes from ``SUMMATION_DATA_DIR``, ``SUMMATION_PORT`` and
``SUMMATION_SEED`` unless overridden via ``create_app``.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from . import pipeline
from .features import FULL_SCHEMA
from .hierarchy import hierarchy_to_json
from .preference import PreferenceRecord, QueryPair, UtilityModel, schedule_queries, train_utility
from .policy import selectable_concepts
from .toy import write_toy_workspace

ROUND_SIZE = 5

QUERYING = "QUERYING"
TRAINED = "TRAINED"
DONE = "DONE"


@dataclass
class CorpusEntry:
    id: str
    directory: Path
    status: str = "building"  # building | ready | failed
    error: str | None = None
    result: object | None = None
    hierarchy: object | None = None
    stats: object | None = None


@dataclass
class SessionState:
    id: str
    corpus_id: str
    query_budget: int
    summary_budget: int
    set_size: int
    strategy: str
    seed: int
    directory: Path
    state: str = QUERYING
    records: list[PreferenceRecord] = field(default_factory=list)
    asked: list[QueryPair] = field(default_factory=list)
    queue: list[QueryPair] = field(default_factory=list)
    pending: QueryPair | None = None
    round_no: int = 0
    model: UtilityModel | None = None
    trained_count: int = 0
    summary: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def log_path(self) -> Path:
        return self.directory / "log.jsonl"


class CorpusCreate(BaseModel):
    jsonl: str | None = None
    path: str | None = None
    toy: bool = False
    vectors_path: str | None = None
    tau: float = Field(default=0.9, gt=0, le=1)
    dim: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _one_source(self):
        if not (self.toy or self.jsonl or self.path):
            raise ValueError("provide one of: toy, jsonl, path")
        return self


class SessionCreate(BaseModel):
    corpus_id: str
    query_budget: int = Field(gt=0)
    summary_budget: int = Field(gt=0)
    feature_set_size: Literal[2, 5, 8, 10] = 10
    strategy: Literal["chain", "active"] = "chain"
    seed: int | None = None


class FeedbackBody(BaseModel):
    choice: Literal["left", "right"]


class SummaryBody(BaseModel):
    skip_remaining: bool = False


def _append_log(session: SessionState, record: dict) -> None:
    with open(session.log_path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _pair_fields(pair: QueryPair) -> dict:
    return {"round": pair.round, "level": pair.level, "left": pair.left, "right": pair.right}


def create_app(data_dir: str | os.PathLike | None = None, seed: int | None = None) -> FastAPI:
    data = Path(data_dir if data_dir is not None else os.environ.get("SUMMATION_DATA_DIR", "summation-data"))
    base_seed = seed if seed is not None else int(os.environ.get("SUMMATION_SEED", "0"))
    data.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="summation")
    corpora: dict[str, CorpusEntry] = {}
    sessions: dict[str, SessionState] = {}
    registry_lock = threading.Lock()
    counters = {"corpus": 0, "session": 0}

    def _build_corpus(entry: CorpusEntry, body: CorpusCreate) -> None:
        try:
            cdir = entry.directory
            if body.toy:
                paths = write_toy_workspace(cdir / "data")
                corpus_path, vectors_path = paths["corpus"], paths["vectors"]
            elif body.jsonl is not None:
                corpus_path = cdir / "data" / "corpus.jsonl"
                corpus_path.parent.mkdir(parents=True, exist_ok=True)
                corpus_path.write_text(body.jsonl, encoding="utf-8")
                vectors_path = body.vectors_path
            else:
                corpus_path, vectors_path = body.path, body.vectors_path
            pipeline.run_ingest(
                corpus_path, cdir, vectors_path=vectors_path,
                tau=body.tau, dim=body.dim, seed=base_seed,
            )
            pipeline.run_build(cdir / "concepts.json", cdir, seed=base_seed)
            entry.result = pipeline.load_concepts(cdir / "concepts.json")
            from .hierarchy import hierarchy_from_json

            entry.hierarchy = hierarchy_from_json(json.loads((cdir / "hierarchy.json").read_text()))
            from .features import compute_stats

            entry.stats = compute_stats(entry.result.corpus, entry.result.concepts)
            entry.status = "ready"
        except Exception as exc:  # background worker: record, don't raise
            entry.error = str(exc)
            entry.status = "failed"

    def _get_corpus(corpus_id: str) -> CorpusEntry:
        with registry_lock:
            entry = corpora.get(corpus_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown corpus {corpus_id!r}")
        return entry

    def _get_session(session_id: str) -> SessionState:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def _lookup_for(session: SessionState):
        entry = corpora[session.corpus_id]
        lookup, _ = pipeline.make_phi_lookup(entry.stats, session.set_size)
        return lookup

    def _retrain(session: SessionState) -> None:
        lookup = _lookup_for(session)
        schema = FULL_SCHEMA[: session.set_size]
        session.model = train_utility(
            session.records, lookup, schema, seed=session.seed
        )
        session.trained_count = len(session.records)
        session.round_no += 1

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/corpora")
    def create_corpus(body: CorpusCreate):
        with registry_lock:
            counters["corpus"] += 1
            corpus_id = f"corpus-{counters['corpus']}"
            entry = CorpusEntry(id=corpus_id, directory=data / "corpora" / corpus_id)
            corpora[corpus_id] = entry
        entry.directory.mkdir(parents=True, exist_ok=True)
        worker = threading.Thread(target=_build_corpus, args=(entry, body), daemon=True)
        worker.start()
        return {"corpus_id": corpus_id, "status": entry.status}

    @app.get("/corpora/{corpus_id}/hierarchy")
    def get_hierarchy(corpus_id: str):
        entry = _get_corpus(corpus_id)
        if entry.status == "failed":
            raise HTTPException(status_code=500, detail=f"build failed: {entry.error}")
        if entry.status != "ready":
            raise HTTPException(status_code=404, detail="hierarchy not built yet")
        return hierarchy_to_json(entry.hierarchy, entry.result.concepts)

    @app.post("/sessions")
    def create_session(body: SessionCreate):
        entry = _get_corpus(body.corpus_id)
        if entry.status == "failed":
            raise HTTPException(status_code=500, detail=f"build failed: {entry.error}")
        if entry.status != "ready":
            raise HTTPException(status_code=409, detail="corpus still building")
        with registry_lock:
            counters["session"] += 1
            session_id = f"session-{counters['session']}"
            session = SessionState(
                id=session_id,
                corpus_id=body.corpus_id,
                query_budget=body.query_budget,
                summary_budget=body.summary_budget,
                set_size=body.feature_set_size,
                strategy=body.strategy,
                seed=body.seed if body.seed is not None else base_seed,
                directory=data / "sessions" / session_id,
            )
            sessions[session_id] = session
        session.directory.mkdir(parents=True, exist_ok=True)
        session.model = UtilityModel(
            weights=np.zeros(session.set_size), schema=FULL_SCHEMA[: session.set_size]
        )
        _append_log(
            session,
            {
                "type": "session",
                "session_id": session_id,
                "corpus_id": body.corpus_id,
                "query_budget": body.query_budget,
                "summary_budget": body.summary_budget,
                "feature_set_size": body.feature_set_size,
                "strategy": body.strategy,
                "seed": session.seed,
                "round_size": ROUND_SIZE,
            },
        )
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}/query")
    def next_query(session_id: str):
        session = _get_session(session_id)
        entry = corpora[session.corpus_id]
        with session.lock:
            if session.state != QUERYING:
                return {"exhausted": True}
            if session.pending is None:
                if not session.queue and len(session.records) < session.query_budget:
                    want = min(ROUND_SIZE, session.query_budget - len(session.records))
                    pairs = schedule_queries(
                        entry.hierarchy,
                        want,
                        strategy=session.strategy,
                        model=session.model,
                        phi_lookup=_lookup_for(session),
                        exclude=session.asked,
                        start_round=session.round_no,
                    )
                    session.queue = list(pairs)
                    session.asked.extend(pairs)
                    if not pairs:
                        session.state = TRAINED
                        return {"exhausted": True}
                if not session.queue:
                    session.state = TRAINED
                    return {"exhausted": True}
                session.pending = session.queue.pop(0)
                _append_log(session, {"type": "query", **_pair_fields(session.pending)})
            pair = session.pending
            left = entry.result.concepts[pair.left]
            right = entry.result.concepts[pair.right]
            return {
                "exhausted": False,
                **_pair_fields(pair),
                "left_label": left.canonical_label,
                "right_label": right.canonical_label,
                "remaining": session.query_budget - len(session.records),
            }

    @app.post("/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, body: FeedbackBody):
        session = _get_session(session_id)
        with session.lock:
            if session.state == DONE:
                raise HTTPException(status_code=409, detail="session already finished")
            if session.pending is None:
                raise HTTPException(status_code=409, detail="no pending query")
            record = PreferenceRecord(pair=session.pending, choice=body.choice)
            session.records.append(record)
            _append_log(
                session,
                {"type": "feedback", "choice": body.choice, **_pair_fields(record.pair)},
            )
            session.pending = None
            retrained = False
            if not session.queue:
                _retrain(session)
                retrained = True
            if len(session.records) >= session.query_budget:
                session.state = TRAINED
            return {
                "remaining": session.query_budget - len(session.records),
                "state": session.state,
                "retrained": retrained,
            }

    @app.post("/sessions/{session_id}/summary")
    def post_summary(session_id: str, body: SummaryBody | None = None):
        session = _get_session(session_id)
        skip = bool(body.skip_remaining) if body is not None else False
        entry = corpora[session.corpus_id]
        with session.lock:
            if session.summary is not None:
                return session.summary
            if session.state == QUERYING and not skip:
                raise HTTPException(
                    status_code=422,
                    detail="queries remain; answer them or pass skip_remaining",
                )
            session.pending = None
            session.queue = []
            if session.trained_count < len(session.records):
                _retrain(session)
            session.summary = _finalize_summary(session, entry)
            session.state = DONE
            _append_log(session, {"type": "summary", "budget": session.summary_budget})
            return session.summary

    def _finalize_summary(session: SessionState, entry: CorpusEntry) -> dict:
        from .preference import rank_concepts

        lookup = _lookup_for(session)
        labels = selectable_concepts(entry.hierarchy)
        table = rank_concepts(session.model, labels, lookup)
        training = pipeline.TrainingResult(
            model=session.model,
            ranking_rank=table.rank,
            ranking_utility=table.utility,
            records=session.records,
            stats=entry.stats,
            set_size=session.set_size,
        )
        pipeline.save_training(training, entry.result.concepts, session.directory)
        pipeline.run_summarize(
            entry.directory / "concepts.json",
            entry.directory / "hierarchy.json",
            session.directory / "ranking.json",
            session.directory / "features.json",
            session.directory,
            budget=session.summary_budget,
            set_size=session.set_size,
            seed=session.seed,
        )
        return json.loads((session.directory / "summary.json").read_text(encoding="utf-8"))

    return app


def replay_session(log_path: str | os.PathLike, data_dir: str | os.PathLike, out_dir: str | os.PathLike):
    """Rebuild the utility model and summary from a session log alone.

    Returns (weights, summary dict). The log's corpus artifacts must
    still exist under ``data_dir``; replays are written to ``out_dir``.
    """
    records = []
    header = None
    with open(log_path, "r", encoding="utf-8") as fh:
        for line in fh:
            event = json.loads(line)
            if event["type"] == "session":
                header = event
            elif event["type"] == "feedback":
                pair = QueryPair(
                    level=event["level"], left=event["left"],
                    right=event["right"], round=event["round"],
                )
                records.append(PreferenceRecord(pair=pair, choice=event["choice"]))
    if header is None:
        raise ValueError("log has no session header")

    cdir = Path(data_dir) / "corpora" / header["corpus_id"]
    result = pipeline.load_concepts(cdir / "concepts.json")
    from .features import compute_stats
    from .hierarchy import hierarchy_from_json
    from .preference import rank_concepts

    hierarchy = hierarchy_from_json(json.loads((cdir / "hierarchy.json").read_text()))
    stats = compute_stats(result.corpus, result.concepts)
    set_size = header["feature_set_size"]
    lookup, _ = pipeline.make_phi_lookup(stats, set_size)
    schema = FULL_SCHEMA[:set_size]
    model = train_utility(records, lookup, schema, seed=header["seed"])
    table = rank_concepts(model, selectable_concepts(hierarchy), lookup)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    training = pipeline.TrainingResult(
        model=model,
        ranking_rank=table.rank,
        ranking_utility=table.utility,
        records=records,
        stats=stats,
        set_size=set_size,
    )
    pipeline.save_training(training, result.concepts, out)
    pipeline.run_summarize(
        cdir / "concepts.json",
        cdir / "hierarchy.json",
        out / "ranking.json",
        out / "features.json",
        out,
        budget=header["summary_budget"],
        set_size=set_size,
        seed=header["seed"],
    )
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    return model.weights, summary


def main() -> None:
    import uvicorn

    port = int(os.environ.get("SUMMATION_PORT", "8000"))
    uvicorn.run(create_app(), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
