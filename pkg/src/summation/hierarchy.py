"""Mention grouping and the hierarchical concept map.

The tree is built top-down: at each node the cluster count is chosen by
the gap statistic, then an evenness-penalized k-means splits the members.
The clustering objective is

    J = sum of squared distances to assigned centers - alpha * min cluster size

so minimizing J favors even clusters. (Written as a penalty the sign
differs from naive reading; with alpha = 0 it is exactly the k-means SSE,
which is what the brute-force tests pin down.) Node labels are real
surface concepts: the member nearest the node center. Membership of a
member in its node is the inverse squared distance to the center, floored
at epsilon so coincident vectors stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import VectorStore, embed_concept, similarity
from .errors import DimMismatchError, EmptyInputError, TooFewPointsError
from .ingest import DETERMINERS

DEFAULT_EPSILON = 1e-9


@dataclass
class Concept:
    """A grouped concept: one id covering all coreferent mention spans."""

    id: int
    canonical_label: str
    mentions: list = field(default_factory=list)  # of (doc_id, sent_index, tokens)
    vector: np.ndarray | None = None
    frequency: int = 0
    merge_count: int = 0  # stage-2 merges absorbed into this concept

    @property
    def label_tokens(self) -> tuple[str, ...]:
        return tuple(self.canonical_label.split())


@dataclass
class Clustering:
    k: int
    centers: np.ndarray
    assignment: dict[int, int]
    objective: float
    history: list[float] = field(default_factory=list)


@dataclass
class HierarchyNode:
    label_concept_id: int
    level: int
    children: list["HierarchyNode"] = field(default_factory=list)
    members: list[tuple[int, float]] = field(default_factory=list)
    center: np.ndarray | None = None

    def member_ids(self) -> set[int]:
        return {cid for cid, _ in self.members}

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def _group_key(tokens) -> tuple[str, ...]:
    toks = [t.lower() for t in tokens]
    i = 0
    while i < len(toks) and toks[i] in DETERMINERS:
        i += 1
    return tuple(toks[i:])


def group_mentions(
    mentions, store: VectorStore, tau: float = 0.9
) -> list[Concept]:
    """Group coreferent mention spans into concepts.

    Stage 1 merges exact matches after case-folding and determiner
    stripping. Stage 2 walks groups in descending frequency order and
    greedily merges a group into the already-accepted group with the
    highest vector cosine when that cosine reaches ``tau``; the accepted
    group's vector stays fixed so the merge order is well defined.

    ``mentions`` is an iterable of (doc_id, sent_index, tokens).
    """
    if not 0 < tau <= 1:
        raise ValueError("tau must be in (0, 1]")
    groups: dict[tuple[str, ...], dict] = {}
    for doc_id, sent_index, tokens in mentions:
        key = _group_key(tokens)
        if not key:
            continue
        grp = groups.setdefault(key, {"mentions": [], "surface": {}})
        grp["mentions"].append((doc_id, sent_index, tuple(tokens)))
        surface = " ".join(tokens)
        grp["surface"][surface] = grp["surface"].get(surface, 0) + 1

    order = sorted(
        groups.items(), key=lambda kv: (-len(kv[1]["mentions"]), kv[0])
    )
    accepted: list[dict] = []
    for key, grp in order:
        vec_sum = np.zeros(store.dim)
        for _, _, tokens in grp["mentions"]:
            vec, _ = embed_concept(tokens, store)
            vec_sum += vec
        vec = vec_sum / len(grp["mentions"])
        best, best_cos = None, -2.0
        for cand in accepted:
            cos = similarity(vec, cand["vector"], kind="cosine")
            if cos > best_cos:
                best, best_cos = cand, cos
        if best is not None and best_cos >= tau:
            best["mentions"].extend(grp["mentions"])
            for s, c in grp["surface"].items():
                best["surface"][s] = best["surface"].get(s, 0) + c
            best["merge_count"] += 1
        else:
            accepted.append(
                {"mentions": list(grp["mentions"]), "surface": dict(grp["surface"]),
                 "vector": vec, "merge_count": 0}
            )

    concepts = []
    for cid, grp in enumerate(accepted):
        label = min(grp["surface"], key=lambda s: (-grp["surface"][s], s))
        vec_sum = np.zeros(store.dim)
        for _, _, tokens in grp["mentions"]:
            v, _ = embed_concept(tokens, store)
            vec_sum += v
        concepts.append(
            Concept(
                id=cid,
                canonical_label=label,
                mentions=grp["mentions"],
                vector=vec_sum / len(grp["mentions"]),
                frequency=len(grp["mentions"]),
                merge_count=grp["merge_count"],
            )
        )
    return concepts


def _objective(X, centers, assign, alpha: float) -> float:
    sse = 0.0
    sizes = np.zeros(len(centers))
    for i, a in enumerate(assign):
        d = X[i] - centers[a]
        sse += float(d @ d)
        sizes[a] += 1
    return sse - alpha * float(sizes.min())


def _kmeanspp_init(X, k, rng) -> np.ndarray:
    n = len(X)
    centers = [X[int(rng.integers(n))]]
    for _ in range(1, k):
        d2 = np.min(
            ((X[:, None, :] - np.array(centers)[None, :, :]) ** 2).sum(axis=2),
            axis=1,
        )
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(X[idx])
    return np.array(centers, dtype=float)


def kmeans_even(
    points,
    k: int,
    alpha: float = 0.0,
    seed: int = 0,
    max_iter: int = 100,
    n_init: int = 10,
) -> Clustering:
    """Lloyd-style clustering of (id, vector) pairs minimizing the
    evenness-penalized objective.

    A point moves only when the move strictly decreases J; empty clusters
    are repaired by stealing the farthest point from the largest cluster.
    J is recorded (and asserted non-increasing) at every step. ``n_init``
    independent seeded restarts are run and the lowest final J wins,
    which is what makes small instances land on the global optimum.
    """
    ids = [pid for pid, _ in points]
    X = np.array([np.asarray(v, dtype=float) for _, v in points])
    n = len(X)
    if k < 1:
        raise TooFewPointsError("k must be >= 1")
    if n < k:
        raise TooFewPointsError(f"{n} points for k={k}")

    best: Clustering | None = None
    for run in range(max(1, n_init)):
        clustering = _kmeans_once(ids, X, k, alpha, (seed, run), max_iter)
        if best is None or clustering.objective < best.objective:
            best = clustering
    return best


def _kmeans_once(ids, X, k, alpha, seed, max_iter) -> Clustering:
    n = len(X)
    rng = np.random.default_rng(seed)
    centers = _kmeanspp_init(X, k, rng)
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    _repair_empty(X, centers, assign, k)

    history = [_objective(X, centers, assign, alpha)]
    for _ in range(max_iter):
        moved = False
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        if alpha == 0.0:
            best = d2.argmin(axis=1)
            improve = d2[np.arange(n), best] < d2[np.arange(n), assign]
            if improve.any():
                assign[improve] = best[improve]
                moved = True
        else:
            sizes = np.bincount(assign, minlength=k).astype(float)
            for i in range(n):
                cur = assign[i]
                if sizes[cur] <= 1:
                    continue  # moving would empty the cluster
                best_j, best_delta = cur, 0.0
                for j in range(k):
                    if j == cur:
                        continue
                    d_sse = d2[i, j] - d2[i, cur]
                    old_min = sizes.min()
                    sizes[cur] -= 1
                    sizes[j] += 1
                    d_pen = -alpha * (sizes.min() - old_min)
                    sizes[cur] += 1
                    sizes[j] -= 1
                    delta = d_sse + d_pen
                    if delta < best_delta:
                        best_j, best_delta = j, delta
                if best_j != cur:
                    sizes[cur] -= 1
                    sizes[best_j] += 1
                    assign[i] = best_j
                    moved = True
        _repair_empty(X, centers, assign, k)
        history.append(_objective(X, centers, assign, alpha))

        for j in range(k):
            mask = assign == j
            if mask.any():
                centers[j] = X[mask].mean(axis=0)
        history.append(_objective(X, centers, assign, alpha))

        for prev, cur in zip(history, history[1:]):
            if cur > prev + 1e-9:
                raise AssertionError(
                    f"objective increased: {prev} -> {cur}"
                )
        if not moved:
            break

    obj = _objective(X, centers, assign, alpha)
    return Clustering(
        k=k,
        centers=centers,
        assignment={pid: int(a) for pid, a in zip(ids, assign)},
        objective=obj,
        history=history,
    )


def _repair_empty(X, centers, assign, k) -> None:
    for j in range(k):
        if (assign == j).any():
            continue
        sizes = np.bincount(assign, minlength=k)
        largest = int(sizes.argmax())
        members = np.flatnonzero(assign == largest)
        dists = ((X[members] - centers[largest]) ** 2).sum(axis=1)
        steal = members[int(dists.argmax())]
        assign[steal] = j
        centers[j] = X[steal]


def _dispersion(X, k: int, seed: int) -> float:
    points = list(enumerate(X))
    clustering = kmeans_even(points, k=k, alpha=0.0, seed=seed, max_iter=50)
    centers = clustering.centers
    sse = 0.0
    for i, a in clustering.assignment.items():
        d = X[i] - centers[a]
        sse += float(d @ d)
    return max(sse, 1e-12)


def select_k(points, k_range=(2, 8), B: int = 10, seed: int = 0) -> int:
    """Pick a cluster count by the gap statistic.

    Reference data is drawn uniformly over the bounding box of the points,
    B replicates per k. Returns the smallest k in range with
    Gap(k) >= Gap(k+1) - s_{k+1}; if no k qualifies, the top of the range.
    """
    X = np.array([np.asarray(v, dtype=float) for _, v in points])
    n = len(X)
    if n < 1:
        raise TooFewPointsError("no points")
    k_min = max(1, min(int(k_range[0]), n))
    k_max = max(k_min, min(int(k_range[1]), n))
    if k_min == k_max:
        return k_min

    rng = np.random.default_rng(seed)
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)

    gaps, sks = {}, {}
    ks = list(range(k_min, k_max + 1))
    for k in ks:
        log_wk = np.log(_dispersion(X, k, seed=seed + k))
        ref_logs = []
        for b in range(B):
            ref = lo + rng.random(size=X.shape) * span
            ref_logs.append(np.log(_dispersion(ref, k, seed=seed + k)))
        ref_logs = np.array(ref_logs)
        gaps[k] = float(ref_logs.mean() - log_wk)
        sks[k] = float(ref_logs.std() * np.sqrt(1.0 + 1.0 / B))

    for k in ks[:-1]:
        if gaps[k] >= gaps[k + 1] - sks[k + 1]:
            return k
    return k_max


def membership_degree(vector, center, epsilon: float = DEFAULT_EPSILON) -> float:
    """Inverse squared distance to the center, floored at epsilon."""
    v = np.asarray(vector, dtype=float)
    c = np.asarray(center, dtype=float)
    if v.shape != c.shape:
        raise DimMismatchError(f"dims differ: {v.shape} vs {c.shape}")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    d = c - v
    return 1.0 / max(float(d @ d), epsilon)


@dataclass
class HierarchyParams:
    k_range: tuple[int, int] = (2, 8)
    alpha: float = 0.1
    min_node_size: int = 3
    max_depth: int = 3
    seed: int = 0
    gap_replicates: int = 10
    epsilon: float = DEFAULT_EPSILON


def build_hierarchy(concepts: list[Concept], params: HierarchyParams) -> HierarchyNode:
    """Recursive top-down clustering of concept vectors into a labeled tree."""
    if not concepts:
        raise EmptyInputError("no concepts to organize")
    by_id = {c.id: c for c in concepts}
    ids = sorted(by_id)
    root_center = np.mean([by_id[i].vector for i in ids], axis=0)
    root = _make_node(ids, by_id, root_center, level=0, epsilon=params.epsilon)
    _split_node(root, by_id, params, seed=params.seed)
    return root


def _make_node(ids, by_id, center, level: int, epsilon: float) -> HierarchyNode:
    members = [
        (cid, membership_degree(by_id[cid].vector, center, epsilon)) for cid in ids
    ]
    label = _nearest_member(ids, by_id, center)
    return HierarchyNode(
        label_concept_id=label, level=level, members=members, center=center
    )


def _nearest_member(ids, by_id, center) -> int:
    best, best_d = None, None
    for cid in sorted(ids):
        d = float(np.sum((by_id[cid].vector - center) ** 2))
        if best_d is None or d < best_d:
            best, best_d = cid, d
    return best


def label_node(node: HierarchyNode, concepts: list[Concept]) -> int:
    """Member concept nearest the node center (ties to the lower id)."""
    by_id = {c.id: c for c in concepts}
    ids = [cid for cid, _ in node.members]
    return _nearest_member(ids, by_id, node.center)


def _split_node(node, by_id, params: HierarchyParams, seed: int) -> None:
    ids = [cid for cid, _ in node.members]
    if len(ids) <= params.min_node_size or node.level >= params.max_depth:
        return
    X = np.array([by_id[cid].vector for cid in ids])
    if float(np.ptp(X)) < 1e-12:
        return  # all vectors coincide; nothing to split
    points = [(cid, by_id[cid].vector) for cid in ids]
    k = select_k(points, k_range=params.k_range, B=params.gap_replicates, seed=seed)
    if k <= 1:
        return
    clustering = kmeans_even(points, k=k, alpha=params.alpha, seed=seed)
    for j in range(clustering.k):
        child_ids = [cid for cid in ids if clustering.assignment[cid] == j]
        if not child_ids:
            continue
        child = _make_node(
            child_ids, by_id, clustering.centers[j], node.level + 1, params.epsilon
        )
        node.children.append(child)
    for idx, child in enumerate(node.children):
        _split_node(child, by_id, params, seed=seed ^ (idx + 1))


def prune_hierarchy(root: HierarchyNode, thresholds: dict[int, float]) -> HierarchyNode:
    """Drop subtrees whose center has low cosine to the parent center.

    ``thresholds`` maps a level to its minimum cosine; levels without an
    entry are never pruned. Members of removed subtrees stay in ancestor
    member lists. Returns a new tree; the input is untouched.
    """

    def clone(node: HierarchyNode) -> HierarchyNode:
        kept = []
        for child in node.children:
            thr = thresholds.get(child.level)
            if thr is not None:
                cos = similarity(child.center, node.center, kind="cosine")
                if cos < thr:
                    continue
            kept.append(clone(child))
        return HierarchyNode(
            label_concept_id=node.label_concept_id,
            level=node.level,
            children=kept,
            members=list(node.members),
            center=None if node.center is None else np.array(node.center),
        )

    return clone(root)


def hierarchy_to_json(
    root: HierarchyNode, concepts: list[Concept], include_centers: bool = False
) -> dict:
    by_id = {c.id: c for c in concepts}

    def encode(node: HierarchyNode) -> dict:
        out = {
            "label": by_id[node.label_concept_id].canonical_label,
            "label_id": node.label_concept_id,
            "level": node.level,
            "members": [
                {"concept": cid, "membership": float(m)} for cid, m in node.members
            ],
            "children": [encode(c) for c in node.children],
        }
        if include_centers and node.center is not None:
            out["center"] = [float(x) for x in node.center]
        return out

    return encode(root)


def hierarchy_from_json(data: dict) -> HierarchyNode:
    node = HierarchyNode(
        label_concept_id=int(data["label_id"]),
        level=int(data["level"]),
        members=[(int(m["concept"]), float(m["membership"])) for m in data["members"]],
        center=np.array(data["center"]) if "center" in data else None,
    )
    node.children = [hierarchy_from_json(c) for c in data["children"]]
    return node
