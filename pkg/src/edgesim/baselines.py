"""Reference policies: a fully random one (B1) and a nearest-cache /
proportional-fair / request-frequency heuristic (B2)."""

from __future__ import annotations

import numpy as np

from .scheduler import associate_users


# ---------------------------------------------------------------- association


def b1_associate(requests, cache_mask, coverage, anchors, busy, rng):
    """Random covering SBS; the cloud supplies the content if that SBS lacks it."""
    anchors = np.array(anchors, dtype=np.int64, copy=True)
    U = len(requests)
    via_cloud = np.zeros(U, dtype=bool)
    dropped = np.zeros(U, dtype=bool)
    for u in range(U):
        f = requests[u]
        if f < 0:
            continue
        if not (busy[u] and anchors[u] >= 0):
            cover = np.flatnonzero(coverage[:, u])
            if cover.size == 0:
                dropped[u] = True
                continue
            anchors[u] = int(rng.choice(cover))
        via_cloud[u] = not cache_mask[anchors[u], f]
    return anchors, via_cloud, dropped


def b2_associate(requests, cache_mask, dist, coverage, anchors, busy):
    """Nearest covering SBS that caches the content, else the nearest covering SBS."""
    S = cache_mask.shape[0]
    # queue-blind: same ranking as the proposed rule with every backlog equal
    return associate_users(requests, cache_mask, np.zeros(S), dist, coverage, anchors, busy)


# ---------------------------------------------------------------- RB matching and scheduling


def b1_schedule(Q, H: int, rng):
    """Each of the first ``H`` RBs goes to a random backlogged user, who then
    serves one random backlogged content.

    ``Q`` is the (U, F) backlog of the SBS's users. Returns ``(b, Y)`` with
    ``b`` of shape (U, H) and ``Y`` of shape (U, F).
    """
    Q = np.asarray(Q, dtype=float)
    U, F = Q.shape
    b = np.zeros((U, H), dtype=np.int64)
    Y = np.zeros((U, F), dtype=np.int64)
    backlogged = np.flatnonzero(Q.sum(axis=1) > 0)
    if backlogged.size == 0 or H == 0:
        return b, Y
    for m in range(H):
        b[int(rng.choice(backlogged)), m] = 1
    for u in np.flatnonzero(b.sum(axis=1)):
        Y[u, int(rng.choice(np.flatnonzero(Q[u] > 0)))] = 1
    return b, Y


def b2_schedule(Q, inst_rate, avg_rate):
    """Per RB, the backlogged user with the best instantaneous-to-average rate ratio;
    matched users serve their largest backlog.

    ``inst_rate`` is (U, H) spectral efficiency per RB, ``avg_rate`` the (U,)
    long-run average. Ties go to the lowest index.
    """
    Q = np.asarray(Q, dtype=float)
    U, F = Q.shape
    H = inst_rate.shape[1]
    b = np.zeros((U, H), dtype=np.int64)
    Y = np.zeros((U, F), dtype=np.int64)
    backlogged = Q.sum(axis=1) > 0
    if not backlogged.any() or H == 0:
        return b, Y
    score = np.where(backlogged[:, None], inst_rate / np.maximum(avg_rate, 1e-9)[:, None], -np.inf)
    for m in range(H):
        b[int(np.argmax(score[:, m])), m] = 1
    for u in np.flatnonzero(b.sum(axis=1)):
        Y[u, int(np.argmax(Q[u]))] = 1
    return b, Y


class PfTracker:
    """Exponentially weighted average delivered rate per user."""

    def __init__(self, U: int, memory: float = 0.99, floor: float = 1e-3):
        self.avg = np.full(U, floor)
        self.memory = memory
        self.floor = floor

    def update(self, delivered) -> None:
        self.avg = np.maximum(self.memory * self.avg + (1.0 - self.memory) * np.asarray(delivered, dtype=float), self.floor)


# ---------------------------------------------------------------- caching


def _limited_swap(old, target_order, d: int, N: int) -> list[int]:
    """Move the cache toward the first ``d`` entries of ``target_order``, changing at most N contents."""
    cache = list(old)
    want = list(target_order[:d])
    incoming = [f for f in want if f not in cache]
    outgoing = [f for f in reversed(cache) if f not in want]
    changes = 0
    for f in incoming:
        if changes >= N:
            break
        if len(cache) < d:
            cache.append(f)
        elif outgoing:
            cache[cache.index(outgoing.pop(0))] = f
        else:
            break
        changes += 1
    return sorted(int(f) for f in cache)


def b1_cache(old, F: int, d: int, N: int, rng) -> list[int]:
    """Random target set of ``d`` contents, reached with at most N changes."""
    order = [int(f) for f in rng.permutation(F)]
    return _limited_swap(old, order, d, N)


def b2_cache(old, counts, d: int, N: int) -> list[int]:
    """Most requested contents so far (ties by lower id), at most N changes."""
    counts = np.asarray(counts, dtype=float)
    order = [int(f) for f in np.lexsort((np.arange(len(counts)), -counts))]
    # among the current cache, evict the least requested first
    old_sorted = sorted(old, key=lambda f: (-counts[f], f))
    return _limited_swap(old_sorted, order, d, N)


# ---------------------------------------------------------------- fronthaul


def equal_fronthaul(Q_cloud) -> np.ndarray:
    """Equal share of the fronthaul for every backlogged (SBS, content) queue."""
    Q_cloud = np.asarray(Q_cloud, dtype=float)
    busy = Q_cloud > 0
    n = busy.sum()
    return np.where(busy, 1.0 / n, 0.0) if n else np.zeros_like(Q_cloud)
