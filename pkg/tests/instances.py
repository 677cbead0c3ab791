"""Seeded tiny problem generators shared by unit and acceptance tests."""

import numpy as np

from edgesim.config import SimConfig
from edgesim.scheduler import FronthaulInstance, SbsInstance
from edgesim.sim import World


def micro_sbs(rng, max_users=2, max_rbs=2, max_contents=2) -> SbsInstance:
    U = int(rng.integers(1, max_users + 1))
    M = int(rng.integers(1, max_rbs + 1))
    pairs = [(u, f) for u in range(U) for f in range(max_contents) if rng.random() < 0.6]
    have = {u for u, _ in pairs}
    pairs += [(u, 0) for u in range(U) if u not in have]
    pairs.sort()
    pu = np.array([u for u, _ in pairs])
    zeta = 10 ** rng.uniform(-1, 3, size=(U, M))
    w = rng.uniform(0.5, 20, size=len(pairs))
    W = np.minimum(rng.uniform(0.5, 5, size=len(pairs)), w)
    return SbsInstance(zeta, pu, w, W, M, float(rng.choice([1.0, 10.0, 100.0])), 0.44, 1.0)


def fuzzed_sbs(rng) -> SbsInstance:
    U = int(rng.integers(1, 5))
    M = int(rng.integers(1, 7))
    F = int(rng.integers(1, 4))
    pairs = sorted({(u, int(rng.integers(F))) for u in range(U) for _ in range(2)})
    pu = np.array([u for u, _ in pairs])
    zeta = 10 ** rng.uniform(-2, 4, size=(U, M))
    Q = rng.uniform(0.1, 30, size=len(pairs))
    w = Q + rng.uniform(0, 10, size=len(pairs))
    W = np.minimum(Q, rng.uniform(0.1, 10, size=len(pairs)))
    return SbsInstance(zeta, pu, w, W, int(rng.integers(1, M + 1)), float(rng.choice([1.0, 10.0, 100.0])), float(rng.uniform(0.1, 2)), 1.0)


def fuzzed_fronthaul(rng) -> FronthaulInstance:
    P = int(rng.integers(1, 9))
    Q = rng.uniform(0.1, 40, size=P)
    w = Q + rng.uniform(0, 10, size=P)
    a = float(rng.uniform(1, 30))
    return FronthaulInstance(w, np.minimum(Q, a), float(rng.choice([1.0, 10.0, 100.0])), a, 1.0, nu_max=Q / a)


MICRO_CFG = SimConfig(
    area_side=4.0,
    lambda_sbs=0.08,
    lambda_ue=0.12,
    num_rbs=3,
    catalog_size=3,
    cache_size=2,
    max_cache_updates=1,
    T1=50,
    T2=10,
    max_clusters=2,
)


def micro_worlds(n, horizon=200, method="PC", cfg=MICRO_CFG):
    """First ``n`` seeds whose topology has at most 2 SBSs and 3 users."""
    out, seed = [], 0
    while len(out) < n:
        w = World(cfg, method, seed, horizon)
        if w.S <= 2 and w.U <= 3:
            out.append(w)
        seed += 1
    return out
