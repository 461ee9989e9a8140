"""Mention grouping, evenness-penalized k-means, gap-statistic model
selection, and the recursive concept tree."""

from itertools import product

import numpy as np
import pytest

from summation.embedding import VectorStore
from summation.errors import (
    DimMismatchError,
    EmptyInputError,
    TooFewPointsError,
)
from summation.hierarchy import (
    Concept,
    HierarchyParams,
    build_hierarchy,
    group_mentions,
    hierarchy_from_json,
    hierarchy_to_json,
    kmeans_even,
    label_node,
    membership_degree,
    prune_hierarchy,
    select_k,
)


def brute_force_sse(X, k) -> float:
    """Optimal SSE over all surjective assignments of the points."""
    n = len(X)
    best = None
    for assign in product(range(k), repeat=n):
        if len(set(assign)) < k:
            continue
        sse = 0.0
        for j in range(k):
            members = X[[i for i in range(n) if assign[i] == j]]
            center = members.mean(axis=0)
            sse += float(((members - center) ** 2).sum())
        if best is None or sse < best:
            best = sse
    return best


class TestGroupMentions:
    def test_stage1_folds_case_and_determiners(self):
        store = VectorStore(dim=2, entries={"lab": np.array([1.0, 0.0])})
        mentions = [
            ("d1", 0, ("The", "Lab")),
            ("d1", 1, ("lab",)),
            ("d2", 0, ("the", "lab")),
        ]
        concepts = group_mentions(mentions, store)
        assert len(concepts) == 1
        assert concepts[0].frequency == 3
        assert concepts[0].merge_count == 0
        # All surfaces occur once; ties go to the lexicographically least.
        assert concepts[0].canonical_label == "The Lab"

    def test_majority_surface_becomes_label(self):
        store = VectorStore(dim=2, entries={"lab": np.array([1.0, 0.0])})
        mentions = [
            ("d1", 0, ("lab",)),
            ("d1", 1, ("lab",)),
            ("d2", 0, ("The", "Lab")),
        ]
        (concept,) = group_mentions(mentions, store)
        assert concept.canonical_label == "lab"

    def test_stage2_merges_at_high_cosine(self):
        # cos(alpha, alfa) = 0.95 exactly by construction.
        store = VectorStore(
            dim=2,
            entries={
                "alpha": np.array([1.0, 0.0]),
                "alfa": np.array([0.95, float(np.sqrt(1 - 0.95**2))]),
            },
        )
        mentions = [
            ("d1", 0, ("alpha",)),
            ("d1", 1, ("alpha",)),
            ("d2", 0, ("alfa",)),
        ]
        merged = group_mentions(mentions, store, tau=0.9)
        assert len(merged) == 1
        assert merged[0].canonical_label == "alpha"
        assert merged[0].frequency == 3
        assert merged[0].merge_count == 1

        kept = group_mentions(mentions, store, tau=0.96)
        assert len(kept) == 2
        assert sorted(c.frequency for c in kept) == [1, 2]
        assert all(c.merge_count == 0 for c in kept)

    def test_tau_validated(self):
        store = VectorStore(dim=2, entries={"a": np.array([1.0, 0.0])})
        for tau in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                group_mentions([("d", 0, ("a",))], store, tau=tau)

    def test_stage1_matches_hand_partition(self):
        # Orthogonal per-word vectors keep stage 2 out of the picture, so
        # the result must equal the partition by (case-fold, strip leading
        # determiners) recomputed here from scratch.
        words = [f"w{i}" for i in range(6)]
        store = VectorStore(
            dim=8, entries={w: np.eye(8)[i] for i, w in enumerate(words)}
        )
        rng = np.random.default_rng(3)
        mentions = []
        for m in range(40):
            w = words[int(rng.integers(6))]
            toks = [w.upper() if rng.random() < 0.3 else w]
            if rng.random() < 0.4:
                toks.insert(0, ("the", "a", "an", "The")[int(rng.integers(4))])
            mentions.append((f"d{int(rng.integers(3))}", m, tuple(toks)))

        def strip_key(tokens):
            toks = [t.lower() for t in tokens]
            while toks and toks[0] in ("the", "a", "an"):
                toks.pop(0)
            return tuple(toks)

        expected: dict[tuple, int] = {}
        for mention in mentions:
            key = strip_key(mention[2])
            expected[key] = expected.get(key, 0) + 1

        concepts = group_mentions(mentions, store)
        got = {strip_key(c.label_tokens): c.frequency for c in concepts}
        assert got == expected


class TestKmeansEven:
    def test_matches_brute_force_on_random_instances(self):
        for seed in range(3):
            X = np.random.default_rng(seed).random((6, 2))
            points = [(i, X[i]) for i in range(6)]
            for k in (2, 3):
                result = kmeans_even(points, k, alpha=0.0, seed=0)
                assert result.objective == pytest.approx(
                    brute_force_sse(X, k), abs=1e-9
                )

    def test_objective_history_non_increasing(self):
        X = np.random.default_rng(1).random((12, 3))
        result = kmeans_even([(i, X[i]) for i in range(12)], 3, alpha=0.5, seed=0)
        for prev, cur in zip(result.history, result.history[1:]):
            assert cur <= prev + 1e-9

    def test_zero_alpha_objective_is_sse(self):
        X = np.random.default_rng(2).random((8, 2))
        result = kmeans_even([(i, X[i]) for i in range(8)], 2, alpha=0.0, seed=0)
        sse = 0.0
        for i in range(8):
            d = X[i] - result.centers[result.assignment[i]]
            sse += float(d @ d)
        assert result.objective == pytest.approx(sse, abs=1e-12)

    def test_k_one_returns_mean(self):
        X = np.array([[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]])
        result = kmeans_even([(i, X[i]) for i in range(3)], 1, seed=0)
        assert np.allclose(result.centers[0], [2.0, 0.0])
        assert result.objective == pytest.approx(8.0)

    def test_every_point_assigned_and_no_cluster_empty(self):
        X = np.random.default_rng(4).random((10, 2))
        result = kmeans_even([(i, X[i]) for i in range(10)], 4, alpha=0.2, seed=1)
        assert sorted(result.assignment) == list(range(10))
        assert set(result.assignment.values()) == set(range(4))

    def test_evenness_penalty_balances_clusters(self):
        # Five points near the origin plus one far outlier: plain SSE
        # isolates the outlier (sizes 5/1) while a large penalty on the
        # smallest cluster forces a 3/3 split.
        points = [
            (0, np.array([0.0, 0.0])),
            (1, np.array([0.2, 0.0])),
            (2, np.array([0.4, 0.0])),
            (3, np.array([0.0, 0.3])),
            (4, np.array([0.2, 0.3])),
            (5, np.array([10.0, 0.0])),
        ]
        plain = kmeans_even(points, 2, alpha=0.0, seed=0)
        sizes = sorted(
            np.bincount(list(plain.assignment.values()), minlength=2)
        )
        assert sizes == [1, 5]

        even = kmeans_even(points, 2, alpha=100.0, seed=0)
        sizes = sorted(np.bincount(list(even.assignment.values()), minlength=2))
        assert sizes == [3, 3]

    def test_deterministic(self):
        X = np.random.default_rng(5).random((9, 2))
        points = [(i, X[i]) for i in range(9)]
        a = kmeans_even(points, 3, alpha=0.1, seed=7)
        b = kmeans_even(points, 3, alpha=0.1, seed=7)
        assert a.assignment == b.assignment
        assert a.objective == b.objective

    def test_size_validation(self):
        points = [(0, np.array([0.0, 0.0]))]
        with pytest.raises(TooFewPointsError):
            kmeans_even(points, 0)
        with pytest.raises(TooFewPointsError):
            kmeans_even(points, 2)


class TestSelectK:
    @staticmethod
    def three_blobs(seed: int):
        centers = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        rng = np.random.default_rng(seed)
        pts = []
        for c in centers:
            pts.extend(c + 0.1 * rng.standard_normal((15, 2)))
        return [(i, p) for i, p in enumerate(pts)]

    def test_recovers_three_blobs(self):
        assert select_k(self.three_blobs(0), k_range=(2, 8), B=10, seed=0) == 3

    def test_degenerate_range_returns_endpoint(self):
        points = self.three_blobs(1)
        assert select_k(points, k_range=(4, 4)) == 4

    def test_range_clamped_to_point_count(self):
        points = [(i, np.array([float(i), 0.0])) for i in range(2)]
        assert select_k(points, k_range=(2, 8)) == 2

    def test_no_points_rejected(self):
        with pytest.raises(TooFewPointsError):
            select_k([])


class TestMembershipDegree:
    def test_inverse_square_distance(self):
        assert membership_degree([0.0, 0.0], [2.0, 0.0]) == pytest.approx(0.25)
        assert membership_degree([0.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0)

    def test_coincident_point_floored_by_epsilon(self):
        assert membership_degree([1.0, 1.0], [1.0, 1.0]) == pytest.approx(1e9)
        assert membership_degree(
            [1.0, 1.0], [1.0, 1.0], epsilon=0.5
        ) == pytest.approx(2.0)

    def test_validation(self):
        with pytest.raises(DimMismatchError):
            membership_degree([1.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            membership_degree([1.0], [0.0], epsilon=0.0)


def concept_grid(vectors) -> list[Concept]:
    return [
        Concept(id=i, canonical_label=f"c{i}",
                mentions=[(f"d{i}", 0, (f"c{i}",))],
                vector=np.asarray(v, dtype=float), frequency=1)
        for i, v in enumerate(vectors)
    ]


def two_cluster_concepts() -> list[Concept]:
    rng = np.random.default_rng(0)
    vectors = np.concatenate([
        np.array([5.0, 0.0]) + 0.1 * rng.standard_normal((5, 2)),
        np.array([-5.0, 0.0]) + 0.1 * rng.standard_normal((5, 2)),
    ])
    return concept_grid(vectors)


class TestBuildHierarchy:
    def test_children_partition_parent_members(self):
        concepts = two_cluster_concepts()
        params = HierarchyParams(k_range=(2, 4), min_node_size=2, seed=0)
        root = build_hierarchy(concepts, params)
        assert root.level == 0
        assert root.member_ids() == set(range(10))
        for node in root.walk():
            if not node.children:
                continue
            child_union: set[int] = set()
            for child in node.children:
                assert child.level == node.level + 1
                assert child.member_ids() <= node.member_ids()
                assert not (child_union & child.member_ids())
                child_union |= child.member_ids()
            assert child_union == node.member_ids()

    def test_label_is_member_nearest_center(self):
        concepts = two_cluster_concepts()
        params = HierarchyParams(k_range=(2, 4), min_node_size=2, seed=0)
        root = build_hierarchy(concepts, params)
        by_id = {c.id: c for c in concepts}
        for node in root.walk():
            assert node.label_concept_id in node.member_ids()
            best = min(
                sorted(node.member_ids()),
                key=lambda cid: float(
                    np.sum((by_id[cid].vector - node.center) ** 2)
                ),
            )
            assert node.label_concept_id == best

    def test_small_node_not_split(self):
        concepts = concept_grid(np.random.default_rng(0).random((3, 2)))
        root = build_hierarchy(concepts, HierarchyParams(min_node_size=3))
        assert root.children == []

    def test_max_depth_zero_keeps_root_only(self):
        concepts = two_cluster_concepts()
        root = build_hierarchy(
            concepts, HierarchyParams(min_node_size=2, max_depth=0)
        )
        assert root.children == []

    def test_identical_vectors_not_split(self):
        concepts = concept_grid(np.ones((6, 2)))
        root = build_hierarchy(concepts, HierarchyParams(min_node_size=2))
        assert root.children == []

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyInputError):
            build_hierarchy([], HierarchyParams())

    def test_memberships_are_inverse_square_distances(self):
        concepts = two_cluster_concepts()
        params = HierarchyParams(k_range=(2, 4), min_node_size=2, seed=0)
        root = build_hierarchy(concepts, params)
        by_id = {c.id: c for c in concepts}
        for node in root.walk():
            for cid, degree in node.members:
                assert degree == pytest.approx(
                    membership_degree(by_id[cid].vector, node.center)
                )

    def test_deterministic(self):
        concepts = two_cluster_concepts()
        params = HierarchyParams(k_range=(2, 4), min_node_size=2, seed=0)
        a = hierarchy_to_json(build_hierarchy(concepts, params), concepts)
        b = hierarchy_to_json(build_hierarchy(concepts, params), concepts)
        assert a == b


class TestLabelNode:
    def test_tie_breaks_to_lower_id(self):
        concepts = concept_grid([[1.0, 0.0], [-1.0, 0.0]])
        root = build_hierarchy(
            concepts, HierarchyParams(min_node_size=2, max_depth=0)
        )
        # Both members are distance 1 from the center at the origin.
        assert np.allclose(root.center, [0.0, 0.0])
        assert label_node(root, concepts) == 0


class TestPruneHierarchy:
    @staticmethod
    def built():
        concepts = two_cluster_concepts()
        params = HierarchyParams(k_range=(2, 4), min_node_size=2, seed=0)
        return concepts, build_hierarchy(concepts, params)

    def test_permissive_threshold_keeps_everything(self):
        concepts, root = self.built()
        pruned = prune_hierarchy(root, {1: -1.01})
        assert hierarchy_to_json(pruned, concepts) == hierarchy_to_json(
            root, concepts
        )

    def test_impossible_threshold_removes_level(self):
        _, root = self.built()
        assert root.children
        pruned = prune_hierarchy(root, {1: 1.01})
        assert pruned.children == []
        assert pruned.member_ids() == root.member_ids()

    def test_unlisted_levels_untouched(self):
        _, root = self.built()
        pruned = prune_hierarchy(root, {99: 1.01})
        assert len(pruned.children) == len(root.children)

    def test_input_not_mutated(self):
        concepts, root = self.built()
        before = hierarchy_to_json(root, concepts)
        prune_hierarchy(root, {1: 1.01})
        assert hierarchy_to_json(root, concepts) == before


class TestHierarchyJson:
    def test_roundtrip_preserves_structure(self):
        concepts = two_cluster_concepts()
        params = HierarchyParams(k_range=(2, 4), min_node_size=2, seed=0)
        root = build_hierarchy(concepts, params)
        data = hierarchy_to_json(root, concepts, include_centers=True)
        again = hierarchy_from_json(data)

        def compare(a, b):
            assert a.label_concept_id == b.label_concept_id
            assert a.level == b.level
            assert len(a.members) == len(b.members)
            for (cid_a, m_a), (cid_b, m_b) in zip(a.members, b.members):
                assert cid_a == cid_b
                assert m_a == pytest.approx(m_b)
            assert np.allclose(a.center, b.center)
            assert len(a.children) == len(b.children)
            for ca, cb in zip(a.children, b.children):
                compare(ca, cb)

        compare(root, again)

    def test_labels_resolved_through_concepts(self):
        concepts = two_cluster_concepts()
        root = build_hierarchy(
            concepts, HierarchyParams(min_node_size=2, max_depth=0)
        )
        data = hierarchy_to_json(root, concepts)
        assert data["label"] == concepts[data["label_id"]].canonical_label
        assert data["level"] == 0
        assert len(data["members"]) == 10
