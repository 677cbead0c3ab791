"""Queue laws, latency costs and the one-slot drift bound.

Packet queues are kept in packets; rates passed to the laws are already
converted to packets per slot.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

ARRIVAL_FLOOR = 1e-6


def step_user_queue(Q, served, arrived):
    return np.maximum(Q - served, 0) + arrived


def step_cloud_queue(Q, nu, uncached_requests, size, alpha, X, packet_bits):
    """Cloud backlog after a slot of ``(1-alpha) nu X`` bits of fronthaul service."""
    service = (1.0 - alpha) * nu * X / packet_bits
    return np.maximum(Q - service, 0) + size * uncached_requests


def step_resource_queue(H: int, allocated: int, h_arrival: int, M: int) -> int:
    if allocated > H:
        raise RuntimeError(f"allocated {allocated} RBs but only {H} available")
    return int(min(max(H - allocated + h_arrival, 0), M))


def step_deficit_queue(gamma, Q_next, bound):
    return np.maximum(gamma + Q_next - bound, 0)


def user_deficit_bound(eps_u, avg_arrival, qos_latency):
    return eps_u * avg_arrival * qos_latency


def cloud_deficit_bound(eps_s, qos_latency, size):
    # T / mu_f with 1/mu_f the content size in packets
    return eps_s * qos_latency * size


def access_cost(W, rate_bits, packet_bits, c):
    """Slots needed to push ``W`` packets at ``rate_bits`` bits/slot, floored by ``c``."""
    return packet_bits * W / (rate_bits + c)


def fronthaul_cost(W, nu, alpha, X, packet_bits, c):
    return packet_bits * W / ((1.0 - alpha) * nu * X + c)


def cache_update_time(new_cache, old_cache, sizes, X_s, packet_bits, max_updates, form="printed", on_grid=True):
    """Time to fetch the contents of ``new_cache`` missing from ``old_cache``.

    ``form="printed"`` divides by size times fronthaul capacity;
    ``form="corrected"`` charges transfer bits over capacity.
    """
    if not on_grid:
        return 0.0
    fresh = [f for f in new_cache if f not in set(old_cache)]
    if len(fresh) > max_updates:
        raise RuntimeError(f"{len(fresh)} cache updates exceed the limit of {max_updates}")
    sizes = np.asarray(sizes, dtype=float)
    if form == "printed":
        return float(sum(packet_bits / (sizes[f] * X_s) for f in fresh))
    if form == "corrected":
        return float(sum(packet_bits * sizes[f] / X_s for f in fresh))
    raise ValueError(f"unknown form {form!r}")


class RunningAverage:
    """Slot-average arrival rate with a positive floor."""

    def __init__(self, shape, floor: float = ARRIVAL_FLOOR):
        self.total = np.zeros(shape)
        self.count = 0
        self.floor = floor

    def update(self, arrivals) -> None:
        self.total += arrivals
        self.count += 1

    @property
    def value(self) -> np.ndarray:
        if self.count == 0:
            return np.full_like(self.total, self.floor)
        return np.maximum(self.total / self.count, self.floor)


@dataclass
class QueueLedger:
    Q_user: np.ndarray  # (S, U, F) packets
    Q_cloud: np.ndarray  # (S, F) packets
    H: np.ndarray  # (S,) RBs
    G_user: np.ndarray  # (S, U, F) deficit
    G_cloud: np.ndarray  # (S, F) deficit
    avg_arrival: RunningAverage

    @classmethod
    def empty(cls, S: int, U: int, F: int, H0) -> "QueueLedger":
        return cls(
            Q_user=np.zeros((S, U, F)),
            Q_cloud=np.zeros((S, F)),
            H=np.asarray(H0, dtype=np.int64).copy(),
            G_user=np.zeros((S, U, F)),
            G_cloud=np.zeros((S, F)),
            avg_arrival=RunningAverage((S, U, F)),
        )

    def state_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.Q_user.ravel(), self.Q_cloud.ravel(), self.H.astype(float), self.G_user.ravel(), self.G_cloud.ravel()]
        )

    def check(self, M: int) -> None:
        for name in ("Q_user", "Q_cloud", "G_user", "G_cloud"):
            if (getattr(self, name) < 0).any():
                raise RuntimeError(f"negative entry in {name}")
        if (self.H < 0).any() or (self.H > M).any():
            raise RuntimeError("RB inventory out of [0, M]")

    def write_snapshot(self, writer: csv.writer, slot: int) -> None:
        for (s, u, f) in zip(*np.nonzero(self.Q_user)):
            writer.writerow([slot, f"user:{s}:{u}:{f}", self.Q_user[s, u, f]])
        for (s, f) in zip(*np.nonzero(self.Q_cloud)):
            writer.writerow([slot, f"cloud:{s}:{f}", self.Q_cloud[s, f]])
        for s, h in enumerate(self.H):
            writer.writerow([slot, f"rb:{s}", int(h)])


@dataclass
class SlotTransition:
    """Everything one slot did to the ledger; enough to evaluate the drift bound.

    Service terms are the packets actually removed, i.e. already capped at the
    backlog.
    """

    user_served: np.ndarray  # (S, U, F)
    user_arrived: np.ndarray
    user_bound: np.ndarray
    cloud_served: np.ndarray  # (S, F)
    cloud_arrived: np.ndarray
    cloud_bound: np.ndarray
    rb_allocated: np.ndarray  # (S,)
    rb_arrival: np.ndarray  # (S,)


def lyapunov(vec: np.ndarray) -> float:
    return 0.5 * float(vec @ vec)


def drift_bound(before: QueueLedger, tr: SlotTransition) -> tuple[float, float]:
    """Constant and queue-weighted parts of the one-slot drift bound.

    Returns ``(C, linear)`` so that the drift must not exceed ``C + linear``.
    """
    Qn_user = before.Q_user - tr.user_served + tr.user_arrived
    Qn_cloud = before.Q_cloud - tr.cloud_served + tr.cloud_arrived
    dH = tr.rb_arrival - tr.rb_allocated
    C = 0.5 * (
        np.sum((tr.user_arrived - tr.user_served) ** 2)
        + np.sum(dH.astype(float) ** 2)
        + np.sum((tr.cloud_arrived - tr.cloud_served) ** 2)
        + np.sum((tr.user_bound - Qn_user) ** 2)
        + np.sum((tr.cloud_bound - Qn_cloud) ** 2)
    )
    linear = (
        np.sum(before.Q_user * (tr.user_arrived - tr.user_served))
        + np.sum(before.G_user * (Qn_user - tr.user_bound))
        + np.sum(before.Q_cloud * (tr.cloud_arrived - tr.cloud_served))
        + np.sum(before.G_cloud * (Qn_cloud - tr.cloud_bound))
        + np.sum(before.H * dH)
    )
    return float(C), float(linear)
