"""Summary-selection MDP: transitions, brute-force enumeration, and the
TD-trained policy."""

import numpy as np
import pytest

from summation.errors import IllegalActionError, TooLargeError
from summation.hierarchy import Concept, HierarchyNode
from summation.policy import (
    TERMINATE,
    MdpState,
    SummaryMdp,
    enumerate_summaries,
    generate_summary,
    selectable_concepts,
    state_features,
    step,
    train_td,
)
from summation.preference import RankingTable


def node(label, level, children=()):
    return HierarchyNode(
        label_concept_id=label, level=level, children=list(children)
    )


def flat3():
    """Root with leaf labels 1, 2, 3 ranked 0, 1, 2."""
    tree = node(0, 0, [node(1, 1), node(2, 1), node(3, 1)])
    ranking = RankingTable(rank={1: 0, 2: 1, 3: 2},
                           utility={1: 0.0, 2: 0.5, 3: 1.0})
    return tree, ranking


def nested():
    """Label 1 unlocks labels 2 and 3; label 4 sits beside label 1."""
    tree = node(0, 0, [
        node(1, 1, [node(2, 2), node(3, 2)]),
        node(4, 1),
    ])
    ranking = RankingTable(rank={1: 0, 2: 1, 3: 2, 4: 3},
                           utility={1: 0.0, 2: 0.3, 3: 0.6, 4: 1.0})
    return tree, ranking


def lookup_from(rows: dict):
    table = {k: np.asarray(v, dtype=float) for k, v in rows.items()}
    return lambda cid: table[cid]


class TestMdpBasics:
    def test_selectable_concepts_excludes_root(self):
        tree, _ = nested()
        assert selectable_concepts(tree) == [1, 2, 3, 4]

    def test_initial_state(self):
        tree, ranking = flat3()
        env = SummaryMdp(tree, ranking, 2)
        state = env.initial_state()
        assert state.selected == ()
        assert state.remaining_budget == 2
        assert not state.terminal
        assert state.initial_budget == 2

    def test_zero_budget_starts_terminal(self):
        tree, ranking = flat3()
        env = SummaryMdp(tree, ranking, 0)
        assert env.initial_state().terminal
        assert env.legal_actions(env.initial_state()) == []

    def test_negative_budget_rejected(self):
        tree, ranking = flat3()
        with pytest.raises(ValueError):
            SummaryMdp(tree, ranking, -1)

    def test_legal_actions_respect_path_constraint(self):
        tree, ranking = nested()
        env = SummaryMdp(tree, ranking, 2)
        state = env.initial_state()
        assert env.legal_actions(state) == [TERMINATE, 1, 4]
        state, _ = env.step(state, 1)
        assert env.legal_actions(state) == [TERMINATE, 2, 3, 4]

    def test_terminate_on_empty_draft_scores_zero(self):
        tree, ranking = flat3()
        env = SummaryMdp(tree, ranking, 2)
        nxt, reward = env.step(env.initial_state(), TERMINATE)
        assert nxt.terminal
        assert reward == 0.0

    def test_reward_normalization_worked_example(self):
        # Ranks 2 and 0 over three labels with budget 2:
        # (2 + 0) / ((3 - 1) * 2) = 0.5.
        tree, ranking = flat3()
        env = SummaryMdp(tree, ranking, 2)
        state, reward = env.step(env.initial_state(), 3)
        assert reward == 0.0  # nothing paid until terminal
        state, reward = env.step(state, 1)
        assert state.terminal  # budget exhausted auto-terminates
        assert reward == pytest.approx(0.5)

    def test_reward_only_at_terminal(self):
        tree, ranking = flat3()
        env = SummaryMdp(tree, ranking, 3)
        state, reward = env.step(env.initial_state(), 3)
        assert reward == 0.0 and not state.terminal
        state, reward = env.step(state, TERMINATE)
        assert state.terminal
        assert reward == pytest.approx(2 / 6)

    def test_illegal_actions_raise(self):
        tree, ranking = nested()
        env = SummaryMdp(tree, ranking, 3)
        state = env.initial_state()
        with pytest.raises(IllegalActionError):
            env.step(state, 2)  # parent 1 not selected yet
        state, _ = env.step(state, 1)
        with pytest.raises(IllegalActionError):
            env.step(state, 1)  # already selected
        done, _ = env.step(state, TERMINATE)
        with pytest.raises(IllegalActionError):
            env.step(done, 4)  # episode over

    def test_standalone_step_matches_env(self):
        tree, ranking = nested()
        env = SummaryMdp(tree, ranking, 3)
        mid, _ = env.step(env.initial_state(), 1)
        a = env.step(mid, 3)
        b = step(mid, 3, ranking, tree)
        assert a == b


class TestEnumerate:
    def test_zero_budget_has_only_empty_summary(self):
        tree, ranking = flat3()
        assert enumerate_summaries(tree, 0, ranking) == [(frozenset(), 0.0)]

    def test_flat_tree_budget_three_gives_all_subsets(self):
        tree, ranking = flat3()
        out = enumerate_summaries(tree, 3, ranking)
        assert len(out) == 8  # every subset of three leaves
        rewards = {sel: r for sel, r in out}
        assert rewards[frozenset({1, 2, 3})] == pytest.approx(3 / 6)
        assert rewards[frozenset({3})] == pytest.approx(2 / 6)

    def test_nested_tree_respects_path_constraint(self):
        tree, ranking = nested()
        out = enumerate_summaries(tree, 2, ranking)
        feasible = {sel for sel, _ in out}
        assert feasible == {
            frozenset(), frozenset({1}), frozenset({4}),
            frozenset({1, 4}), frozenset({1, 2}), frozenset({1, 3}),
        }
        rewards = dict(out)
        assert rewards[frozenset({1, 4})] == pytest.approx(0.5)

    def test_guards_against_blowup(self):
        tree = node(0, 0, [node(i, 1) for i in range(1, 22)])
        ranking = RankingTable(rank={i: 0 for i in range(1, 22)}, utility={})
        with pytest.raises(TooLargeError):
            enumerate_summaries(tree, 2, ranking)
        small, ranking_small = flat3()
        with pytest.raises(TooLargeError):
            enumerate_summaries(small, 7, ranking_small)

    def test_best_rank_sum_monotone_in_budget(self):
        # A bigger budget can only enlarge the feasible family, so the best
        # achievable rank sum never drops (the normalized reward may).
        tree, ranking = nested()
        best_prev = -1
        for budget in range(0, 5):
            out = enumerate_summaries(tree, budget, ranking)
            best = max(sum(ranking.rank[c] for c in sel) for sel, _ in out)
            assert best >= best_prev
            best_prev = best


class TestStateFeatures:
    def test_concatenates_sum_and_budget_shares(self):
        lookup = lookup_from({1: [1.0, 0.0], 2: [0.0, 1.0]})
        state = MdpState(selected=(1, 2), remaining_budget=1)
        psi = state_features(state, lookup, 2, budget=3)
        assert np.allclose(psi, [1.0, 1.0, 1 / 3, 2 / 3])

    def test_empty_state_is_zero_vector_plus_full_budget(self):
        lookup = lookup_from({1: [1.0, 0.0]})
        psi = state_features(MdpState((), 4), lookup, 2, budget=4)
        assert np.allclose(psi, [0.0, 0.0, 1.0, 0.0])

    def test_zero_budget_leaves_shares_zero(self):
        lookup = lookup_from({})
        psi = state_features(MdpState((), 0, terminal=True), lookup, 2, budget=0)
        assert np.allclose(psi, np.zeros(4))


class TestTrainTd:
    PHI = {1: [0.0, 1.0], 2: [0.5, 1.0], 3: [1.0, 1.0]}

    def test_deterministic_per_seed(self):
        tree, ranking = flat3()
        lookup = lookup_from(self.PHI)
        a = train_td(tree, ranking, lookup, 2, budget=2, episodes=50, seed=3)
        b = train_td(tree, ranking, lookup, 2, budget=2, episodes=50, seed=3)
        assert np.array_equal(a.value_weights, b.value_weights)
        assert a.hyper["episodes"] == 50

    def test_reaches_enumerated_optimum_on_flat_tree(self):
        tree, ranking = flat3()
        lookup = lookup_from(self.PHI)
        policy = train_td(tree, ranking, lookup, 2, budget=2,
                          episodes=300, seed=0)
        summary = generate_summary(tree, policy, ranking, 2, lookup, 2)
        best = max(r for _, r in enumerate_summaries(tree, 2, ranking))
        assert best == pytest.approx(0.75)
        assert summary.reward == pytest.approx(best)
        assert sorted(summary.selected_ids()) == [2, 3]

    def test_weights_are_finite(self):
        tree, ranking = nested()
        lookup = lookup_from({1: [0.2, 1.0], 2: [0.4, 1.0],
                              3: [0.6, 1.0], 4: [1.0, 1.0]})
        policy = train_td(tree, ranking, lookup, 2, budget=3,
                          episodes=200, seed=1)
        assert np.isfinite(policy.value_weights).all()


class TestGenerateSummary:
    def test_selection_invariants_and_relation_filter(self):
        tree, ranking = nested()
        lookup = lookup_from({1: [0.2, 1.0], 2: [0.4, 1.0],
                              3: [0.6, 1.0], 4: [1.0, 1.0]})
        concepts = [
            Concept(id=i, canonical_label=f"concept {i}", vector=np.zeros(2))
            for i in range(5)
        ]
        relations = [(1, 3, "funds"), (1, 4, "backs"), (2, 3, "feeds")]
        policy = train_td(tree, ranking, lookup, 2, budget=2,
                          episodes=300, seed=0)
        summary = generate_summary(
            tree, policy, ranking, 2, lookup, 2,
            concepts=concepts, relations=relations,
        )
        chosen = set(summary.selected_ids())
        assert len(chosen) <= 2
        if {2, 3} & chosen:
            assert 1 in chosen  # path constraint on the rollout
        assert summary.rank_sum == sum(ranking.rank[c] for c in chosen)
        assert summary.reward == pytest.approx(summary.rank_sum / 6)
        for row in summary.concepts:
            assert set(row) == {"id", "label", "level", "rank"}
            assert row["label"] == f"concept {row['id']}"
        for rel in summary.relations:
            assert rel["from"] in chosen and rel["to"] in chosen

    def test_rollout_matches_enumerated_optimum(self):
        tree, ranking = nested()
        lookup = lookup_from({1: [0.0, 1.0], 2: [0.3, 1.0],
                              3: [0.6, 1.0], 4: [1.0, 1.0]})
        policy = train_td(tree, ranking, lookup, 2, budget=2,
                          episodes=400, seed=0)
        summary = generate_summary(tree, policy, ranking, 2, lookup, 2)
        best = max(r for _, r in enumerate_summaries(tree, 2, ranking))
        assert summary.reward == pytest.approx(best)
