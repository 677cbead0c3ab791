import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgesim.metrics import RunRecord, aggregate_metrics, check_identity, mean_ci95


def test_all_zero_costs():
    frame = aggregate_metrics(RunRecord.allocate(20, 2), 10, 5)
    assert all(v == 0 for k, v in frame.summary.items())
    assert not frame.partial


def test_single_sbs_single_slot():
    rec = RunRecord.allocate(1, 1)
    rec.J_sbs[0, 0], rec.Q_sbs[0, 0], rec.tau[0, 0] = 2.0, 3.0, 0.5
    frame = aggregate_metrics(rec, 1, 1)
    assert frame.windows[0].upsilon_C[0] == pytest.approx(5.5)


def test_empty_horizon():
    frame = aggregate_metrics(RunRecord.allocate(0, 2), 10, 5)
    assert frame.windows == [] and frame.summary == {}


def test_partial_window_flagged():
    assert aggregate_metrics(RunRecord.allocate(25, 1), 10, 5).partial


def _brute(rec, T1, T2):
    """Nested averages written with explicit loops."""
    T, S = rec.J_sbs.shape
    totals, clouds = [], []
    for start in range(0, T, T1):
        stop = min(start + T1, T)
        per_sbs = []
        for s in range(S):
            blocks = []
            for b in range(start, stop, T2):
                e = min(b + T2, stop)
                blocks.append(sum(rec.J_sbs[t, s] for t in range(b, e)) / (e - b))
            J = sum(blocks) / len(blocks)
            Q = sum(rec.Q_sbs[t, s] for t in range(start, stop)) / (stop - start)
            tau = sum(rec.tau[t, s] for t in range(start, stop)) / (stop - start)
            per_sbs.append(J + Q + tau)
        blocks = []
        for b in range(start, stop, T2):
            e = min(b + T2, stop)
            blocks.append(sum(rec.J_cloud[t] for t in range(b, e)) / (e - b))
        cloud = sum(blocks) / len(blocks) + sum(rec.Q_cloud[t] for t in range(start, stop)) / (stop - start)
        labels = rec.labels[start]
        clusters = []
        for k in sorted(set(labels.tolist())):
            mem = [per_sbs[s] for s in range(S) if labels[s] == k]
            clusters.append(sum(mem) / len(mem))
        clouds.append(cloud)
        totals.append(cloud + sum(clusters) / len(clusters))
    return sum(totals) / len(totals), sum(clouds) / len(clouds)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 100_000), T=st.integers(1, 60))
def test_matches_brute_force(seed, T):
    rng = np.random.default_rng(seed)
    S = 2
    rec = RunRecord.allocate(T, S)
    rec.J_sbs[:] = rng.random((T, S)) * 5
    rec.Q_sbs[:] = rng.random((T, S)) * 5
    rec.tau[:] = rng.random((T, S))
    rec.J_cloud[:] = rng.random(T)
    rec.Q_cloud[:] = rng.random(T)
    rec.labels[:] = rng.integers(0, 2, S)
    frame = aggregate_metrics(rec, 12, 5)
    total, cloud = _brute(rec, 12, 5)
    assert frame.summary["delay_total"] == pytest.approx(total, rel=1e-12)
    assert frame.summary["delay_cloud"] == pytest.approx(cloud, rel=1e-12)
    check_identity(frame)


def test_hit_rate_and_ccp_iterations():
    rec = RunRecord.allocate(3, 1)
    rec.requests[:] = [2, 0, 2]
    rec.hits[:] = [1, 0, 2]
    rec.ccp_iterations[:] = [np.nan, 3, 5]
    s = aggregate_metrics(rec, 3, 1).summary
    assert s["hit_rate"] == 0.75 and s["ccp_iterations"] == 4


def test_ci95():
    assert mean_ci95([2.0]) == (2.0, 0.0)
    m, ci = mean_ci95([1.0, 3.0])
    assert m == 2.0 and ci == pytest.approx(1.96 * np.sqrt(2) / np.sqrt(2))
