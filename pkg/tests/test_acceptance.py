"""Acceptance suite: one PASS/FAIL line per criterion.

Long-running: criterion 1 simulates 30 runs of 3000 slots and criterion 2
about 60 runs of 900 slots.
"""

import time

import numpy as np
import pytest
from instances import fuzzed_fronthaul, fuzzed_sbs, micro_sbs, micro_worlds
from scipy.stats import spearmanr

import edgesim.sim as sim_mod
from edgesim.caching import LearnerState, learn_step, log_rate_lipschitz_holds, stationary_strategy
from edgesim.config import SimConfig
from edgesim.metrics import aggregate_metrics
from edgesim.queues import drift_bound, lyapunov, step_cloud_queue, step_deficit_queue, step_resource_queue, step_user_queue
from edgesim.scheduler import (
    enumerate_optimum,
    polish_decision,
    round_decision,
    slot_objective,
    solve_fronthaul,
    solve_sbs_subproblem,
)
from edgesim.sim import World, build_trace
from edgesim.sweep import RunPlan, load_summary, run_sweep

CANON = SimConfig()


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        return ok

    return emit


# ---------------------------------------------------------------- 1. delay vs baselines


def test_c1_delay_vs_baselines(tmp_path, report):
    t0 = time.time()
    plan = RunPlan(["PC", "B1", "B2"], None, [0], list(range(10)), 3000, tmp_path / "c1", base=CANON)
    summ = {(r["method"], r["metric"]): (float(r["mean"]), float(r["ci95"])) for r in load_summary(run_sweep(plan))}
    elapsed = time.time() - t0
    pc, pc_ci = summ[("PC", "delay_total")]
    b1, b1_ci = summ[("B1", "delay_total")]
    b2, b2_ci = summ[("B2", "delay_total")]
    gain = 1 - pc / b1
    ok = gain >= 0.20 and pc < b2 and pc + pc_ci < b1 - b1_ci and elapsed <= 600
    assert report(
        1, ok,
        f"PC {pc:.3f}±{pc_ci:.3f}, B1 {b1:.3f}±{b1_ci:.3f}, B2 {b2:.3f}±{b2_ci:.3f}; "
        f"gain vs B1 {gain:.1%} (need >=20%), PC<B2 {pc < b2}, CIs disjoint {pc + pc_ci < b1 - b1_ci}, {elapsed:.0f}s (<=600s)",
    )


# ---------------------------------------------------------------- 2. trends

TREND_HORIZON = 900
_trend_cache: dict = {}


def _mean_delay(**overrides) -> float:
    key = tuple(sorted(overrides.items()))
    if key not in _trend_cache:
        cfg = CANON.replace(**overrides)
        vals = []
        for seed in range(10):
            w = World(cfg, "PC", seed, TREND_HORIZON, trace=build_trace(cfg, seed, TREND_HORIZON)[2])
            w.run()
            vals.append(aggregate_metrics(w.record, cfg.T1, cfg.T2).summary["delay_total"])
        _trend_cache[key] = float(np.mean(vals))
    return _trend_cache[key]


def test_c2_trends(report):
    t0 = time.time()
    sbs = [0.02, 0.04, 0.06]
    ue = [0.02, 0.04, 0.08]
    d_sbs = [_mean_delay(lambda_sbs=v) for v in sbs]
    d_ue = [_mean_delay(lambda_ue=v) for v in ue]
    rho = CANON.request_prob
    d_rho = [_mean_delay(request_prob=rho / 2), _mean_delay(request_prob=rho)]
    elapsed = time.time() - t0
    r_sbs = spearmanr(sbs, d_sbs)[0]
    r_ue = spearmanr(ue, d_ue)[0]
    ok = r_sbs < 0 and r_ue > 0 and d_rho[1] > d_rho[0] and elapsed <= 1800
    assert report(
        2, ok,
        f"lambda_sbs {sbs} -> {np.round(d_sbs, 3).tolist()} (spearman {r_sbs:+.2f}, need <0); "
        f"lambda_ue {ue} -> {np.round(d_ue, 3).tolist()} (spearman {r_ue:+.2f}, need >0); "
        f"rho {rho / 2}->{rho}: {d_rho[0]:.3f}->{d_rho[1]:.3f} (need increase); "
        f"{TREND_HORIZON} slots x 10 seeds, {elapsed:.0f}s (<=1800s)",
    )


# ---------------------------------------------------------------- 3. learner convergence


def _frozen_learner(util, xi, steps, seed=0):
    rng = np.random.default_rng(seed)
    s = LearnerState.fresh(len(util))
    g1, g2, g3 = CANON.gamma1, CANON.gamma2, CANON.gamma3
    u = rng.random(steps)
    for k in range(steps):
        a = min(int(np.searchsorted(np.cumsum(s.strategy), u[k], side="right")), len(util) - 1)
        s = learn_step(s, a, util[a], g1, g2, g3, xi, CANON.clip_regret)
    return s.strategy


def test_c3_learner_convergence(report):
    util = np.array([-1.0, -1.1, -1.2, -1.3])
    pi = _frozen_learner(util, 0.005, 100_000)
    tie = np.array([-1.0, -1.0, -1.1, -1.2])
    pi_tie = _frozen_learner(tie, 0.005, 100_000, seed=1)
    masses = [stationary_strategy(util, xi)[0] for xi in (0.5, 0.05, 0.005)]
    ok = pi[0] >= 0.95 and abs(pi_tie[0] - 0.5) <= 0.05 and abs(pi_tie[1] - 0.5) <= 0.05 and np.all(np.diff(masses) > 0)
    assert report(
        3, ok,
        f"mass on optimum {pi[0]:.4f} (need >=0.95); tie masses {pi_tie[0]:.4f}, {pi_tie[1]:.4f} (need 0.5±0.05); "
        f"stationary mass over xi 0.5/0.05/0.005: {np.round(masses, 4).tolist()} (increasing)",
    )


# ---------------------------------------------------------------- 4. CCP monotone


def test_c4_ccp_monotone(report):
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst, n = 0.0, 0
    for _ in range(100):
        tr = solve_sbs_subproblem(fuzzed_sbs(rng)).trace
        if tr is not None:
            worst = min(worst, float(np.min(np.diff(tr.objectives), initial=0.0)))
            n += 1
        _, _, tr = solve_fronthaul(fuzzed_fronthaul(rng))
        if tr is not None:
            worst = min(worst, float(np.min(np.diff(tr.objectives), initial=0.0)))
            n += 1
    elapsed = time.time() - t0
    ok = worst >= -1e-9 and elapsed <= 60
    assert report(4, ok, f"{n} traces, largest decrease {max(0.0, -worst):.2e} (tol 1e-9), {elapsed:.1f}s")


# ---------------------------------------------------------------- 5. drift bound


def test_c5_drift_bound(report):
    t0 = time.time()
    checked, bad, worst = 0, 0, -np.inf
    for w in micro_worlds(50, horizon=200):
        w.capture_drift = True
        w.run()
        states = [b.state_vector() for b, _ in w.transitions] + [w.ledger.state_vector()]
        for k, (before, tr) in enumerate(w.transitions):
            C, lin = drift_bound(before, tr)
            gap = lyapunov(states[k + 1]) - lyapunov(states[k]) - (C + lin)
            worst = max(worst, gap)
            bad += gap > 1e-9
            checked += 1
    elapsed = time.time() - t0
    ok = bad == 0 and checked == 50 * 200 and elapsed <= 60
    assert report(5, ok, f"{checked} slots, {bad} violations, max(drift - bound) {worst:.3g}, {elapsed:.1f}s")


# ---------------------------------------------------------------- 6. Lipschitz bound


def test_c6_log_rate_lipschitz(report):
    rng = np.random.default_rng(6)
    x = 10 ** rng.uniform(-4, 5, 100_000)
    y = 10 ** rng.uniform(-4, 5, 100_000)
    held = log_rate_lipschitz_holds(x, y, slack=1e-9)
    assert report(6, bool(held.all()), f"{int(held.sum())}/{held.size} pairs satisfy the bound")


# ---------------------------------------------------------------- 7. oracle optimality


def _ratio(v, best, worst):
    return (v - worst) / (best - worst) if best > worst else 1.0


def test_c7_oracle_ratio(report):
    t0 = time.time()
    rng = np.random.default_rng(7)
    raw, pol = [], []
    for _ in range(100):
        inst = micro_sbs(rng)
        rel = solve_sbs_subproblem(inst, max_outer=CANON.ccp_max_outer, tol=CANON.ccp_tol, gap_tol=CANON.ccp_gap_tol)
        b, Y = round_decision(rel.delta, rel.psi, inst.pair_user, inst.weight, inst.H)
        best, _, _, worst = enumerate_optimum(inst)
        raw.append(_ratio(slot_objective(inst, b, Y), best, worst))
        b2, Y2 = polish_decision(inst, b, Y, rel.psi)
        pol.append(_ratio(slot_objective(inst, b2, Y2), best, worst))
    raw, pol = np.array(raw), np.array(pol)
    elapsed = time.time() - t0
    ok = pol.mean() >= 0.9 and elapsed <= 300
    assert report(
        7, ok,
        f"mean normalized ratio {pol.mean():.4f} (need >=0.9; rounding alone {raw.mean():.4f}); "
        f"instances >=0.9: {(pol >= 0.9).sum()}/100, min {pol.min():.3f}, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 8. queue laws


def test_c8_queue_oracles(report):
    rng = np.random.default_rng(8)
    n = 10_000
    mism = 0
    for _ in range(n):
        q, s, a = (float(v) for v in rng.uniform(0, 50, 3))
        mism += float(step_user_queue(np.float64(q), s, a)) != (q - s if q > s else 0.0) + a

        nu, alpha = float(rng.random()), float(rng.uniform(0, 0.9))
        k, size = int(rng.integers(0, 4)), int(rng.integers(1, 8))
        srv = (1 - alpha) * nu * 480000.0 / 16000
        mism += float(step_cloud_queue(np.float64(q), nu, k, size, alpha, 480000.0, 16000)) != (q - srv if q > srv else 0.0) + size * k

        M = int(rng.integers(1, 10))
        H = int(rng.integers(0, M + 1))
        alloc, h = int(rng.integers(0, H + 1)), int(rng.integers(0, M + 1))
        mism += step_resource_queue(H, alloc, h, M) != min(max(H - alloc + h, 0), M)

        g, bound = float(rng.uniform(0, 20)), float(rng.uniform(0, 20))
        mism += float(step_deficit_queue(np.float64(g), q, bound)) != max(g + q - bound, 0.0)
    assert report(8, mism == 0, f"{4 * n} applications over four queue laws, {mism} mismatches")


# ---------------------------------------------------------------- 9. constraint suite


def test_c9_constraints_full_run(report, monkeypatch):
    counts = {"slots": 0, "decision": 0, "strategy_checks": 0, "strategy": 0}
    real_check = World._check
    real_strategy = sim_mod.check_strategy

    def counting_check(self, dec):
        errs = real_check(self, dec)
        counts["slots"] += 1
        counts["decision"] += len(errs)
        return errs

    def counting_strategy(pi, tol=1e-9):
        counts["strategy_checks"] += 1
        try:
            real_strategy(pi, tol)
        except RuntimeError:
            counts["strategy"] += 1
            raise

    monkeypatch.setattr(World, "_check", counting_check)
    monkeypatch.setattr(sim_mod, "check_strategy", counting_strategy)
    w = World(CANON, "PC", 0, 3000)
    w.run()
    ok = counts["slots"] == 3000 and counts["decision"] == 0 and counts["strategy"] == 0
    assert report(
        9, ok,
        f"{counts['slots']} slots checked for RB budget/uniqueness/scheduling, fronthaul budget and cache size: "
        f"{counts['decision']} violations; {counts['strategy_checks']} strategy checks: {counts['strategy']} violations",
    )


# ---------------------------------------------------------------- 10. determinism


def test_c10_byte_identical(tmp_path, report):
    blobs = []
    for name in ("a", "b"):
        plan = RunPlan(["PC", "PNC", "B1", "B2"], None, [0], [0, 1], 300, tmp_path / name, base=CANON)
        out = run_sweep(plan)
        files = sorted(p.relative_to(out) for p in out.rglob("*.csv"))
        blobs.append({str(f): (out / f).read_bytes() for f in files})
    same = blobs[0] == blobs[1] and len(blobs[0]) > 0
    assert report(10, same, f"{len(blobs[0])} CSV files compared across two runs, identical: {same}")
