"""Pairwise preference queries and the Bradley-Terry utility model.

Users (or the simulated oracle) answer "which concept matters more"
questions over hierarchy labels at the same level. The answers train a
linear utility U*(l) = w . phi(l) by stochastic gradient ascent on the
Bradley-Terry log-likelihood with a small L2 term; ranks are pairwise
win counts under the learned utility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaMismatchError


@dataclass(frozen=True)
class QueryPair:
    level: int
    left: int
    right: int
    round: int = 0

    def __post_init__(self):
        if self.left == self.right:
            raise ValueError("query pair must use two distinct concepts")

    def key(self) -> tuple[int, int, int]:
        return (self.level, min(self.left, self.right), max(self.left, self.right))


@dataclass(frozen=True)
class PreferenceRecord:
    pair: QueryPair
    choice: str  # "left" or "right"

    def __post_init__(self):
        if self.choice not in ("left", "right"):
            raise ValueError(f"choice must be left or right, got {self.choice!r}")

    @property
    def winner(self) -> int:
        return self.pair.left if self.choice == "left" else self.pair.right

    @property
    def loser(self) -> int:
        return self.pair.right if self.choice == "left" else self.pair.left


@dataclass
class UtilityModel:
    weights: np.ndarray
    schema: tuple[str, ...]
    trained_rounds: int = 0

    def utility(self, features: np.ndarray) -> float:
        if len(features) != len(self.weights):
            raise SchemaMismatchError(
                f"feature length {len(features)} vs weights {len(self.weights)}"
            )
        return float(self.weights @ features)


@dataclass
class RankingTable:
    rank: dict[int, int]
    utility: dict[int, float]


def _labels_by_level(hierarchy) -> dict[int, list[int]]:
    """Distinct child labels per level, in first-encounter order top-down."""
    levels: dict[int, list[int]] = {}
    queue = [hierarchy]
    while queue:
        node = queue.pop(0)
        if node.level > 0:
            bucket = levels.setdefault(node.level, [])
            if node.label_concept_id not in bucket:
                bucket.append(node.label_concept_id)
        queue.extend(node.children)
    return levels


def schedule_queries(
    hierarchy,
    budget: int,
    strategy: str = "chain",
    model: UtilityModel | None = None,
    phi_lookup=None,
    exclude=(),
    start_round: int = 0,
) -> list[QueryPair]:
    """Pick the next preference queries over same-level label pairs.

    The chain strategy walks labels [l1, l2, l3, ...] per level top-down
    emitting (l1,l2), (l2,l3), ...; once every level's adjacent chain is
    exhausted it widens the stride so extra budget still yields distinct
    pairs. The active strategy needs a current model and orders candidate
    pairs by |U*(left) - U*(right)| ascending. Pairs listed in ``exclude``
    (as QueryPair or (level, a, b) keys) are never re-asked; output is
    capped at the number of remaining distinct pairs.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if strategy not in ("chain", "active"):
        raise ValueError(f"unknown strategy {strategy!r}")
    levels = _labels_by_level(hierarchy)
    seen: set[tuple[int, int, int]] = set()
    for item in exclude:
        if isinstance(item, QueryPair):
            seen.add(item.key())
        else:
            lvl, a, b = item
            seen.add((lvl, min(a, b), max(a, b)))

    candidates: list[tuple[int, int, int]] = []
    if strategy == "chain":
        max_len = max((len(v) for v in levels.values()), default=0)
        for stride in range(1, max_len):
            for level in sorted(levels):
                labels = levels[level]
                for i in range(len(labels) - stride):
                    candidates.append((level, labels[i], labels[i + stride]))
    else:
        if model is None or phi_lookup is None:
            raise ValueError("active strategy needs a model and phi lookup")
        scored = []
        for level in sorted(levels):
            labels = levels[level]
            for i, a in enumerate(labels):
                for b in labels[i + 1 :]:
                    gap = abs(
                        model.utility(phi_lookup(a)) - model.utility(phi_lookup(b))
                    )
                    scored.append((gap, level, a, b))
        scored.sort(key=lambda t: (t[0], t[1], t[2], t[3]))
        candidates = [(lvl, a, b) for _, lvl, a, b in scored]

    out: list[QueryPair] = []
    for level, a, b in candidates:
        if len(out) >= budget:
            break
        key = (level, min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        out.append(QueryPair(level=level, left=a, right=b, round=start_round))
    return out


def bt_probability(li: int, lj: int, model: UtilityModel, phi_lookup) -> float:
    """F(li, lj) = 1 / (1 + exp(U*(lj) - U*(li)))."""
    diff = model.utility(phi_lookup(lj)) - model.utility(phi_lookup(li))
    # Clamp the exponent so separable data cannot overflow.
    diff = max(min(diff, 500.0), -500.0)
    return 1.0 / (1.0 + math.exp(diff))


def bt_objective(weights, records, phi_lookup, l2: float) -> float:
    """Full-batch Bradley-Terry log-likelihood minus the L2 penalty."""
    model = UtilityModel(weights=np.asarray(weights, dtype=float), schema=())
    total = 0.0
    for rec in records:
        f = bt_probability(rec.winner, rec.loser, model, phi_lookup)
        f = min(max(f, 1e-300), 1.0)
        total += math.log(f)
    return total - l2 * float(np.asarray(weights) @ np.asarray(weights))


def bt_gradient(weights, records, phi_lookup, l2: float) -> np.ndarray:
    """Analytic full-batch gradient of bt_objective."""
    w = np.asarray(weights, dtype=float)
    model = UtilityModel(weights=w, schema=())
    grad = np.zeros_like(w)
    for rec in records:
        f = bt_probability(rec.winner, rec.loser, model, phi_lookup)
        grad += (1.0 - f) * (phi_lookup(rec.winner) - phi_lookup(rec.loser))
    return grad - 2.0 * l2 * w


def train_utility(
    records,
    phi_lookup,
    schema: tuple[str, ...],
    lr: float = 0.05,
    epochs: int = 200,
    seed: int = 0,
    l2: float = 1e-4,
) -> UtilityModel:
    """Stochastic gradient ascent on the preference log-likelihood.

    Weights start at zero; records are shuffled each epoch with the given
    seed, and each record contributes its own gradient step with the L2
    term spread evenly across records.
    """
    dim = len(schema)
    weights = np.zeros(dim)
    records = list(records)
    if not records:
        return UtilityModel(weights=weights, schema=tuple(schema))

    rng = np.random.default_rng(seed)
    n = len(records)
    for _ in range(epochs):
        order = rng.permutation(n)
        for idx in order:
            rec = records[idx]
            model = UtilityModel(weights=weights, schema=tuple(schema))
            f = bt_probability(rec.winner, rec.loser, model, phi_lookup)
            step = (1.0 - f) * (phi_lookup(rec.winner) - phi_lookup(rec.loser))
            weights = weights + lr * (step - (2.0 * l2 / n) * weights)
    return UtilityModel(weights=weights, schema=tuple(schema), trained_rounds=epochs)


def rank_concepts(model: UtilityModel, labels, phi_lookup) -> RankingTable:
    """Rank by pairwise win count under the learned utility."""
    labels = list(labels)
    if not labels:
        raise ValueError("labels must be nonempty")
    utilities = {l: model.utility(phi_lookup(l)) for l in labels}
    rank = {
        li: sum(1 for lj in labels if utilities[li] > utilities[lj])
        for li in labels
    }
    return RankingTable(rank=rank, utility=utilities)


def simulated_oracle(reference_summaries, concepts):
    """Responder that prefers concepts overlapping the references.

    A concept's oracle utility is the fraction of its label tokens that
    appear anywhere in the references (case-folded). Ties go to the
    lexicographically smaller canonical label.
    """
    ref_tokens = set()
    for ref in reference_summaries:
        for tok in ref:
            ref_tokens.add(tok.lower())
    by_id = {c.id: c for c in concepts}

    def utility(concept_id: int) -> float:
        toks = [t.lower() for t in by_id[concept_id].label_tokens]
        if not toks:
            return 0.0
        return sum(1 for t in toks if t in ref_tokens) / len(toks)

    def respond(pair: QueryPair) -> str:
        ul, ur = utility(pair.left), utility(pair.right)
        if ul > ur:
            return "left"
        if ur > ul:
            return "right"
        left_label = by_id[pair.left].canonical_label
        right_label = by_id[pair.right].canonical_label
        return "left" if left_label <= right_label else "right"

    respond.utility = utility
    return respond
