"""Regret-based learning of caching strategies over content classes.

Each SBS learns a mixed strategy over *actions*, where an action is a multiset
of ``N`` content classes (one class per cache update slot). The cloud runs the
same recursion over individual contents. Local and cloud strategies are folded
into a per-content popularity, and every ``T2`` slots each SBS commits a new
cache from the blended strategy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .queues import cache_update_time


def enumerate_actions(K: int, N: int, cap: int = 10_000) -> list[tuple[int, ...]]:
    if K < 1 or N < 1:
        raise ValueError("need at least one class and one update")
    if comb(K + N - 1, N) > cap:
        raise ValueError("action space too large; reduce K or N")
    return list(combinations_with_replacement(range(K), N))


def boltzmann_gibbs(regret, xi: float) -> np.ndarray:
    z = np.asarray(regret, dtype=float) / xi
    z = z - z.max()
    w = np.exp(z)
    return w / w.sum()


def stationary_strategy(util, xi: float) -> np.ndarray:
    """Limit strategy for frozen utilities: softmax of utilities at temperature xi."""
    return boltzmann_gibbs(util, xi)


@dataclass
class LearnerState:
    util: np.ndarray
    regret: np.ndarray
    strategy: np.ndarray
    feedback: float = 0.0
    played: int = 0

    @classmethod
    def fresh(cls, n_actions: int) -> "LearnerState":
        return cls(np.zeros(n_actions), np.zeros(n_actions), np.full(n_actions, 1.0 / n_actions))

    def to_dict(self) -> dict:
        return {
            "util": self.util.tolist(),
            "regret": self.regret.tolist(),
            "strategy": self.strategy.tolist(),
            "feedback": self.feedback,
            "played": self.played,
        }


def learn_step(state: LearnerState, played: int, feedback: float, g1: float, g2: float, g3: float, xi: float, clip: bool = False) -> LearnerState:
    """One utility / regret / strategy update.

    The utility estimate moves only at the played action; every regret moves
    toward ``util_j - feedback``; the strategy moves toward the Boltzmann-Gibbs
    map of the regrets (clipped at zero when ``clip``).
    """
    util = state.util.copy()
    util[played] = (1.0 - g1) * util[played] + g1 * feedback
    regret = (1.0 - g2) * state.regret + g2 * (util - feedback)
    target = boltzmann_gibbs(np.maximum(regret, 0.0) if clip else regret, xi)
    pi = (1.0 - g3) * state.strategy + g3 * target
    pi = np.maximum(pi, 0.0)
    pi /= pi.sum()
    return LearnerState(util, regret, pi, float(feedback), int(played))


def check_strategy(pi, tol: float = 1e-9) -> None:
    if (pi < 0).any() or abs(pi.sum() - 1.0) > tol:
        raise RuntimeError("strategy is not a probability vector")


@dataclass
class ClassModel:
    """Content-to-class map plus the action space built on it."""

    labels: np.ndarray  # (F,) class id per content
    K: int
    actions: list
    membership: np.ndarray  # (A, K) 1 if class k appears in action a

    @classmethod
    def build(cls, labels, N: int, cap: int = 10_000) -> "ClassModel":
        labels = np.asarray(labels, dtype=np.int64)
        K = int(labels.max()) + 1
        actions = enumerate_actions(K, N, cap)
        mem = np.zeros((len(actions), K))
        for i, a in enumerate(actions):
            mem[i, list(set(a))] = 1.0
        return cls(labels, K, actions, mem)

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)


@dataclass
class PopularityProfile:
    class_local: np.ndarray  # (K,)
    local: np.ndarray  # (F,)
    cloud: np.ndarray  # (F,)
    blended: np.ndarray  # (F,)
    blended_class: np.ndarray  # (K,)
    strategy: np.ndarray  # (A,)


def _normalize(v):
    s = v.sum()
    return v / s if s > 0 else np.full_like(v, 1.0 / len(v))


def blend_popularity(pi_s, pi_c, model: ClassModel, beta: float) -> PopularityProfile:
    pi_s = np.asarray(pi_s, dtype=float)
    pi_c = np.asarray(pi_c, dtype=float)
    class_mass = _normalize(model.membership.T @ pi_s)
    sizes = model.class_sizes
    per = np.where(sizes > 0, class_mass / np.maximum(sizes, 1), 0.0)
    local = per[model.labels]
    denom = local + pi_c
    safe = np.where(denom > 0, denom, 1.0)
    raw = np.where(denom > 0, ((1.0 - beta) * local + beta * pi_c) / safe, 0.0)
    blended = _normalize(raw)
    sums = np.bincount(model.labels, weights=blended, minlength=model.K)
    blended_class = np.where(sizes > 0, sums / np.maximum(sizes, 1), 0.0)
    strategy = _normalize(model.membership @ blended_class)
    return PopularityProfile(class_mass, local, pi_c, blended, blended_class, strategy)


def _rank(candidates, score):
    # descending score, lowest id first on ties
    return sorted(candidates, key=lambda f: (-score[f], f))


def apply_action(action, old_cache, popularity, labels, d: int, N: int) -> list[int]:
    """Cache after bringing in the best uncached content of each class in ``action``.

    A new content fills a free slot or replaces the least popular entry when it
    is strictly more popular. At most ``N`` contents change.
    """
    cache = list(old_cache)
    picks: list[int] = []
    for k in action:
        cand = [f for f in np.flatnonzero(labels == k) if f not in cache and f not in picks]
        if cand:
            picks.append(int(_rank(cand, popularity)[0]))
    changes = 0
    for f in _rank(picks, popularity):
        if changes >= N:
            break
        if len(cache) < d:
            cache.append(f)
            changes += 1
            continue
        old_only = [g for g in cache if g not in picks]
        if not old_only:
            break
        victim = min(old_only, key=lambda g: (popularity[g], -g))
        if popularity[victim] < popularity[f]:
            cache[cache.index(victim)] = f
            changes += 1
    return sorted(cache)


def commit_cache(
    profile: PopularityProfile,
    model: ClassModel,
    old_cache,
    d: int,
    N: int,
    rng: np.random.Generator,
    sizes,
    X_s: float,
    packet_bits: int,
    form: str = "printed",
) -> tuple[list[int], float, int]:
    """Sample an action from the blended strategy and apply it.

    Returns the new cache, its update time and the index of the played action.
    """
    a = int(rng.choice(len(model.actions), p=profile.strategy))
    new = apply_action(model.actions[a], old_cache, profile.blended, model.labels, d, N)
    tau = cache_update_time(new, old_cache, sizes, X_s, packet_bits, N, form=form)
    return new, tau, a


def cloud_feedback(J_cloud, Q_cloud, content: int) -> float:
    """Cloud utility of having played ``content``: minus the cloud cost left
    once that content's own fronthaul traffic is removed."""
    J = np.array(J_cloud, dtype=float, copy=True)
    Q = np.array(Q_cloud, dtype=float, copy=True)
    J[:, content] = 0.0
    Q[:, content] = 0.0
    return -(float(J.max(initial=0.0)) + float(Q.max(initial=0.0)))


def log_rate_lipschitz_holds(x, y, slack: float = 1e-9) -> np.ndarray:
    """Elementwise check of |log2(1+x) - log2(1+y)| <= log2(e) |x - y| / (1 + min(x, y))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lhs = np.abs(np.log2(1 + x) - np.log2(1 + y))
    rhs = np.log2(np.e) * np.abs(x - y) / (1 + np.minimum(x, y))
    return lhs <= rhs + slack


def checkpoint_json(states: dict, caches: dict) -> str:
    return json.dumps(
        {
            "learners": {str(k): v.to_dict() for k, v in states.items()},
            "caches": {str(k): [int(f) for f in c] for k, c in caches.items()},
        }
    )
