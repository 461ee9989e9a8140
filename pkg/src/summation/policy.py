"""Summary construction as an episodic MDP with a linear TD(0) policy.

A state is a draft summary: the ordered concept ids selected so far plus
the remaining budget. Actions add one admissible concept or terminate.
Admissibility is the path constraint: a concept can be added only if
some non-root hierarchy node carrying its label sits directly under the
root or under a node whose label is already selected, so every summary
is a coherent sub-map. Reward is paid once, entering the terminal state:
the sum of the selected concepts' ranks normalized by (|L| - 1) * budget,
and exactly 0 elsewhere.

The value function is linear, V(s) = theta . psi(s), with
psi(s) = [sum of phi over selected; remaining/budget; |selected|/budget].
Action values take the known terminal payoff as a floor on V, so the
greedy policy never scores worse than terminating immediately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import IllegalActionError, TooLargeError

TERMINATE = "terminate"


@dataclass(frozen=True)
class MdpState:
    selected: tuple[int, ...]
    remaining_budget: int
    terminal: bool = False

    @property
    def initial_budget(self) -> int:
        return len(self.selected) + self.remaining_budget


@dataclass
class Policy:
    value_weights: np.ndarray
    hyper: dict = field(default_factory=dict)


@dataclass
class SummarySelection:
    concepts: list[dict]  # {"id", "label", "level", "rank"}
    relations: list[dict]  # {"from", "to", "phrase"}
    reward: float
    rank_sum: int
    budget: int

    def selected_ids(self) -> list[int]:
        return [c["id"] for c in self.concepts]


def _label_parents(hierarchy) -> dict[int, list[int | None]]:
    """For each non-root label: parent labels of nodes carrying it.

    ``None`` stands for the root, i.e. the label is selectable outright.
    """
    out: dict[int, list[int | None]] = {}
    root_id = id(hierarchy)

    def visit(node, parent):
        if parent is not None:
            key = None if id(parent) == root_id else parent.label_concept_id
            out.setdefault(node.label_concept_id, []).append(key)
        for child in node.children:
            visit(child, node)

    visit(hierarchy, None)
    return out


def selectable_concepts(hierarchy) -> list[int]:
    """Sorted ids of every concept that labels a non-root node."""
    return sorted(_label_parents(hierarchy))


def _node_levels(hierarchy) -> dict[int, int]:
    """Shallowest level at which each non-root label appears."""
    levels: dict[int, int] = {}
    for node in hierarchy.walk():
        if node.level == 0:
            continue
        cid = node.label_concept_id
        if cid not in levels or node.level < levels[cid]:
            levels[cid] = node.level
    return levels


class SummaryMdp:
    """Environment tying a hierarchy, a ranking and a budget together."""

    def __init__(self, hierarchy, ranking, budget: int):
        if budget < 0:
            raise ValueError("budget must be >= 0")
        self.hierarchy = hierarchy
        self.ranking = ranking
        self.budget = budget
        self.parents = _label_parents(hierarchy)
        self.candidates = sorted(self.parents)
        n_labels = len(ranking.rank)
        self._normalizer = (n_labels - 1) * budget

    def initial_state(self) -> MdpState:
        return MdpState(selected=(), remaining_budget=self.budget,
                        terminal=self.budget == 0)

    def admissible(self, state: MdpState, concept_id: int) -> bool:
        if concept_id in state.selected:
            return False
        options = self.parents.get(concept_id)
        if not options:
            return False
        chosen = set(state.selected)
        return any(p is None or p in chosen for p in options)

    def legal_actions(self, state: MdpState) -> list:
        if state.terminal:
            return []
        actions = [TERMINATE]
        if state.remaining_budget > 0:
            actions += [c for c in self.candidates if self.admissible(state, c)]
        return actions

    def terminal_reward(self, selected) -> float:
        if self._normalizer <= 0:
            return 0.0
        total = sum(self.ranking.rank[c] for c in selected)
        return total / self._normalizer

    def step(self, state: MdpState, action):
        if state.terminal:
            raise IllegalActionError("episode already terminated")
        if action == TERMINATE:
            nxt = MdpState(state.selected, state.remaining_budget, terminal=True)
            return nxt, self.terminal_reward(state.selected)
        concept_id = action
        if state.remaining_budget <= 0:
            raise IllegalActionError("budget exhausted")
        if concept_id in state.selected:
            raise IllegalActionError(f"concept {concept_id} already selected")
        if not self.admissible(state, concept_id):
            raise IllegalActionError(
                f"concept {concept_id} violates the path constraint"
            )
        selected = state.selected + (concept_id,)
        remaining = state.remaining_budget - 1
        if remaining == 0:
            nxt = MdpState(selected, 0, terminal=True)
            return nxt, self.terminal_reward(selected)
        return MdpState(selected, remaining, terminal=False), 0.0


def step(state: MdpState, action, ranking, hierarchy):
    """One transition; standalone form of SummaryMdp.step."""
    env = SummaryMdp(hierarchy, ranking, state.initial_budget)
    return env.step(state, action)


def _grounded(selection: frozenset, parents) -> bool:
    # A set is feasible iff it can be built one admissible add at a time.
    chosen: set[int] = set()
    pending = set(selection)
    progress = True
    while pending and progress:
        progress = False
        for c in sorted(pending):
            if any(p is None or p in chosen for p in parents.get(c, [])):
                chosen.add(c)
                pending.discard(c)
                progress = True
                break
    return not pending


def enumerate_summaries(hierarchy, budget: int, ranking):
    """Every feasible selection of size <= budget, with its reward.

    Brute-force oracle for the learned policy; guarded against blowup.
    """
    env = SummaryMdp(hierarchy, ranking, budget)
    candidates = env.candidates
    if len(candidates) > 20:
        raise TooLargeError(f"{len(candidates)} candidate concepts (max 20)")
    if budget > 6:
        raise TooLargeError(f"budget {budget} (max 6)")
    out = []
    for size in range(0, min(budget, len(candidates)) + 1):
        for combo in combinations(candidates, size):
            sel = frozenset(combo)
            if _grounded(sel, env.parents):
                out.append((sel, env.terminal_reward(sel)))
    return out


def state_features(state: MdpState, phi_lookup, phi_dim: int, budget: int):
    psi = np.zeros(phi_dim + 2)
    for c in state.selected:
        psi[:phi_dim] += phi_lookup(c)
    if budget > 0:
        psi[phi_dim] = state.remaining_budget / budget
        psi[phi_dim + 1] = len(state.selected) / budget
    return psi


def _action_value(env, state, action, theta, phi_lookup, phi_dim):
    nxt, reward = env.step(state, action)
    if nxt.terminal:
        return reward
    psi = state_features(nxt, phi_lookup, phi_dim, env.budget)
    value = float(theta @ psi)
    # Terminating from nxt is always available, so its payoff floors V.
    return reward + max(value, env.terminal_reward(nxt.selected))


def _greedy_action(env, state, theta, phi_lookup, phi_dim):
    actions = env.legal_actions(state)
    best, best_q = TERMINATE, None
    for action in actions:
        q = _action_value(env, state, action, theta, phi_lookup, phi_dim)
        if best_q is None or q > best_q + 1e-12:
            best, best_q = action, q
        elif abs(q - best_q) <= 1e-12 and action == TERMINATE:
            best = action  # never pad with worthless concepts
    return best


def train_td(
    hierarchy,
    ranking,
    phi_lookup,
    phi_dim: int,
    budget: int,
    gamma: float = 1.0,
    lr: float = 0.02,
    epsilon_start: float = 0.5,
    epsilon_decay: float = 0.99,
    episodes: int = 300,
    seed: int = 0,
) -> Policy:
    """Episodic TD(0) with linear value approximation; deterministic per seed."""
    env = SummaryMdp(hierarchy, ranking, budget)
    theta = np.zeros(phi_dim + 2)
    rng = np.random.default_rng(seed)
    epsilon = epsilon_start
    for _ in range(episodes):
        state = env.initial_state()
        while not state.terminal:
            actions = env.legal_actions(state)
            if rng.random() < epsilon:
                action = actions[int(rng.integers(len(actions)))]
            else:
                action = _greedy_action(env, state, theta, phi_lookup, phi_dim)
            nxt, reward = env.step(state, action)
            psi = state_features(state, phi_lookup, phi_dim, budget)
            v_next = 0.0
            if not nxt.terminal:
                psi_next = state_features(nxt, phi_lookup, phi_dim, budget)
                v_next = max(
                    float(theta @ psi_next), env.terminal_reward(nxt.selected)
                )
            target = reward + gamma * v_next
            delta = target - float(theta @ psi)
            # Normalized step: keeps the update stable even though psi
            # sums unbounded per-concept feature rows.
            theta = theta + (lr / (1.0 + float(psi @ psi))) * delta * psi
            state = nxt
        epsilon = max(epsilon * epsilon_decay, 0.01)
    hyper = {
        "gamma": gamma, "lr": lr, "epsilon_start": epsilon_start,
        "epsilon_decay": epsilon_decay, "episodes": episodes, "seed": seed,
        "budget": budget,
    }
    return Policy(value_weights=theta, hyper=hyper)


def generate_summary(
    hierarchy,
    policy: Policy,
    ranking,
    budget: int,
    phi_lookup,
    phi_dim: int,
    concepts=None,
    relations=(),
) -> SummarySelection:
    """Greedy rollout of the learned policy from the empty draft."""
    env = SummaryMdp(hierarchy, ranking, budget)
    theta = policy.value_weights
    state = env.initial_state()
    total_reward = 0.0
    while not state.terminal:
        action = _greedy_action(env, state, theta, phi_lookup, phi_dim)
        state, reward = env.step(state, action)
        total_reward += reward

    labels = {}
    if concepts is not None:
        labels = {c.id: c.canonical_label for c in concepts}
    levels = _node_levels(hierarchy)
    chosen = list(state.selected)
    chosen_set = set(chosen)
    rank_sum = sum(ranking.rank[c] for c in chosen)
    concept_rows = [
        {
            "id": cid,
            "label": labels.get(cid, str(cid)),
            "level": levels.get(cid, 1),
            "rank": ranking.rank[cid],
        }
        for cid in chosen
    ]
    relation_rows = [
        {"from": src, "to": dst, "phrase": phrase}
        for src, dst, phrase in relations
        if src in chosen_set and dst in chosen_set
    ]
    return SummarySelection(
        concepts=concept_rows,
        relations=relation_rows,
        reward=total_reward,
        rank_sum=rank_sum,
        budget=budget,
    )
