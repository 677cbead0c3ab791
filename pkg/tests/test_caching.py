import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgesim.caching import (
    ClassModel,
    LearnerState,
    apply_action,
    blend_popularity,
    boltzmann_gibbs,
    check_strategy,
    checkpoint_json,
    commit_cache,
    enumerate_actions,
    learn_step,
    log_rate_lipschitz_holds,
    stationary_strategy,
)


def test_action_counts():
    assert enumerate_actions(3, 2) == [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    assert len(enumerate_actions(1, 3)) == 1
    assert len(enumerate_actions(2, 1)) == 2
    with pytest.raises(ValueError, match="action space too large"):
        enumerate_actions(40, 5)


@settings(max_examples=40)
@given(K=st.integers(1, 8), N=st.integers(1, 4))
def test_action_count_is_binomial(K, N):
    acts = enumerate_actions(K, N)
    assert len(acts) == comb(K + N - 1, K - 1) == len(set(acts))


def test_boltzmann_gibbs_values():
    np.testing.assert_allclose(boltzmann_gibbs([0.3, 0.3, 0.3], 0.1), 1 / 3)
    np.testing.assert_allclose(boltzmann_gibbs([1.0, 0.0], 1.0), [np.e / (np.e + 1), 1 / (np.e + 1)])
    assert boltzmann_gibbs([0.2, 0.5, 0.1], 1e-6)[1] == pytest.approx(1.0)
    assert np.isfinite(boltzmann_gibbs([1e6, 0.0], 1e-3)).all()


@settings(max_examples=100)
@given(r=st.lists(st.floats(-10, 10), min_size=1, max_size=10), xi=st.floats(1e-3, 10))
def test_boltzmann_argmax_invariance(r, xi):
    p = boltzmann_gibbs(r, xi)
    check_strategy(p)
    # the regret argmax carries the largest probability
    assert p[int(np.argmax(r))] == p.max()


def test_frozen_learning_keeps_strategy():
    st0 = LearnerState(np.zeros(3), np.zeros(3), np.array([0.2, 0.3, 0.5]))
    out = learn_step(st0, 1, -2.0, 0.75, 0.0, 0.0, 0.1)
    np.testing.assert_array_equal(out.strategy, st0.strategy)


def test_single_action_stays_certain():
    s = LearnerState.fresh(1)
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = learn_step(s, 0, -rng.random(), 0.75, 0.65, 0.55, 0.02)
    assert s.strategy.tolist() == [1.0]


def test_learner_tracks_stationary_strategy():
    util = np.array([-1.0, -0.95, -1.1, -1.02])
    xi = 0.02
    rng = np.random.default_rng(5)
    s = LearnerState.fresh(4)
    for _ in range(10_000):
        a = int(rng.choice(4, p=s.strategy))
        s = learn_step(s, a, util[a], 0.75, 0.65, 0.55, xi)
    tv = 0.5 * np.abs(s.strategy - stationary_strategy(util, xi)).sum()
    assert tv < 0.05


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_strategy_stays_probability(seed):
    rng = np.random.default_rng(seed)
    s = LearnerState.fresh(5)
    for _ in range(50):
        s = learn_step(s, int(rng.integers(5)), -rng.random() * 10, 0.75, 0.65, 0.55, 0.01, clip=bool(seed % 2))
        check_strategy(s.strategy)


def test_blend_extremes():
    model = ClassModel.build([0, 0, 1, 2], N=1)
    pi_s = np.array([0.5, 0.3, 0.2])
    pi_c = np.array([0.1, 0.2, 0.3, 0.4])
    p0 = blend_popularity(pi_s, pi_c, model, 0.0)
    local = np.array([0.25, 0.25, 0.3, 0.2])
    np.testing.assert_allclose(p0.local, local)
    ref0 = local / (local + pi_c)
    np.testing.assert_allclose(p0.blended, ref0 / ref0.sum())
    p1 = blend_popularity(pi_s, pi_c, model, 1.0)
    ref1 = pi_c / (local + pi_c)
    np.testing.assert_allclose(p1.blended, ref1 / ref1.sum())
    for p in (p0, p1):
        check_strategy(p.strategy)


@pytest.mark.parametrize("beta", [0.0, 0.3, 1.0])
def test_blend_uniform_stays_uniform(beta):
    model = ClassModel.build([0, 0, 1, 1], N=2)
    p = blend_popularity(np.full(3, 1 / 3), np.full(4, 0.25), model, beta)
    np.testing.assert_allclose(p.blended, 0.25)


def test_apply_action_rules():
    labels = np.array([0, 0, 1, 1])
    pop = np.array([0.4, 0.3, 0.2, 0.1])
    # already cached classes: nothing changes
    assert apply_action((0,), [0, 1], pop, labels, 2, 1) == [0, 1]
    # d >= F caches the whole selected classes
    assert apply_action((0, 1), [], pop, labels, 4, 4) == [0, 2]
    assert apply_action((0, 0), [], pop, labels, 4, 4) == [0, 1]
    # at most N changes
    assert len(set(apply_action((0, 1), [], pop, labels, 4, 1))) == 1


def test_commit_is_reproducible():
    model = ClassModel.build([0, 1, 1, 2, 0], N=2)
    prof = blend_popularity(np.full(len(model.actions), 1 / len(model.actions)), np.full(5, 0.2), model, 0.5)
    out = [commit_cache(prof, model, [0], 3, 2, np.random.default_rng(4), np.ones(5), 48000, 16000) for _ in range(2)]
    assert out[0] == out[1]
    assert len(out[0][0]) <= 3


def test_lipschitz_sample():
    rng = np.random.default_rng(0)
    x, y = rng.exponential(5, 10_000), rng.exponential(5, 10_000)
    assert log_rate_lipschitz_holds(x, y).all()


def test_checkpoint_json():
    doc = json.loads(checkpoint_json({0: LearnerState.fresh(2)}, {0: [1, 3]}))
    assert doc["caches"]["0"] == [1, 3]
    assert doc["learners"]["0"]["strategy"] == [0.5, 0.5]
