"""Per-user Zipf requests with drifting exponents and per-SBS demand counts."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SimConfig

NO_REQUEST = -1


def zipf_pmf(delta: float, F: int) -> np.ndarray:
    """Probability of each popularity rank 1..F under exponent ``delta``."""
    if not delta > 0:
        raise ValueError("zipf exponent must be positive")
    if F < 1:
        raise ValueError("catalog must hold at least one content")
    w = np.arange(1, F + 1, dtype=float) ** (-delta)
    return w / w.sum()


@dataclass
class ContentCatalog:
    sizes: np.ndarray  # packets per content, >= 1
    qos_latency: np.ndarray  # slots per content, > 0
    packet_bits: int

    @property
    def size(self) -> int:
        return len(self.sizes)


def sample_catalog(cfg: SimConfig, rng: np.random.Generator) -> ContentCatalog:
    hi = max(1, int(round(2 * cfg.mean_content_packets)))
    sizes = rng.integers(1, hi + 1, size=cfg.catalog_size)
    qos = rng.integers(cfg.qos_latency_min, cfg.qos_latency_max + 1, size=cfg.catalog_size)
    return ContentCatalog(sizes=sizes.astype(np.int64), qos_latency=qos.astype(float), packet_bits=cfg.bits_per_packet)


@dataclass
class UserPreference:
    delta: float
    permutation: np.ndarray  # rank index -> content id
    drift_var: float
    epoch_clock: int = 0


def initial_preferences(cfg: SimConfig, n_users: int, rng: np.random.Generator) -> list[UserPreference]:
    prefs = []
    for _ in range(n_users):
        delta = rng.uniform(cfg.zipf_init_min, cfg.zipf_init_max)
        prefs.append(UserPreference(delta, rng.permutation(cfg.catalog_size), cfg.zipf_drift_var))
    return prefs


def sample_request(pref: UserPreference, rho: float, rng: np.random.Generator) -> int:
    """Content id requested this slot, or ``NO_REQUEST``."""
    if rng.random() >= rho:
        return NO_REQUEST
    pmf = zipf_pmf(pref.delta, len(pref.permutation))
    rank = int(np.searchsorted(np.cumsum(pmf), rng.random(), side="right"))
    rank = min(rank, len(pmf) - 1)
    return int(pref.permutation[rank])


def evolve_preference(
    pref: UserPreference,
    rng: np.random.Generator,
    T_fix: int,
    delta_min: float = 0.05,
    redraw_permutation: bool = False,
) -> UserPreference:
    """Advance the epoch clock; at ``T_fix`` nudge the exponent by +/- its variance."""
    if pref.epoch_clock >= T_fix:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        pref.delta = max(delta_min, pref.delta + sign * pref.drift_var)
        if redraw_permutation:
            pref.permutation = rng.permutation(len(pref.permutation))
        pref.epoch_clock = 0
    else:
        pref.epoch_clock += 1
    return pref


def generate_trace(cfg: SimConfig, n_users: int, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Requests for every slot and user, shape (horizon, U); ``NO_REQUEST`` marks silence.

    Generated up front from a dedicated stream so every method sees the same trace.
    """
    prefs = initial_preferences(cfg, n_users, rng)
    trace = np.full((horizon, n_users), NO_REQUEST, dtype=np.int64)
    for t in range(horizon):
        for u, p in enumerate(prefs):
            trace[t, u] = sample_request(p, cfg.request_prob, rng)
            evolve_preference(p, rng, cfg.T_FIX, cfg.zipf_min, cfg.redraw_permutation)
    return trace


def demand_vector(requests: np.ndarray, coverage: np.ndarray, F: int) -> np.ndarray:
    """Count requests per (SBS, content) from users inside each SBS's coverage.

    ``requests`` holds one content id (or ``NO_REQUEST``) per user and
    ``coverage`` is the boolean (S, U) coverage matrix.
    """
    requests = np.asarray(requests)
    S = coverage.shape[0]
    D = np.zeros((S, F), dtype=np.int64)
    active = requests >= 0
    if not active.any():
        return D
    onehot = np.zeros((len(requests), F), dtype=np.int64)
    onehot[np.flatnonzero(active), requests[active]] = 1
    return coverage.astype(np.int64) @ onehot


def write_trace(path: str | Path, trace: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "user", "content"])
        for t, u in zip(*np.nonzero(trace >= 0)):
            w.writerow([int(t), int(u), int(trace[t, u])])


def read_trace(path: str | Path, horizon: int, n_users: int) -> np.ndarray:
    trace = np.full((horizon, n_users), NO_REQUEST, dtype=np.int64)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t, u = int(row["slot"]), int(row["user"])
            if t < horizon and u < n_users:
                trace[t, u] = int(row["content"])
    return trace
