"""Per-slot records and the windowed worst-case delay aggregates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunRecord:
    """Slot-by-slot quantities a run produces, stacked on the first axis."""

    J_sbs: np.ndarray  # (T, S) max access cost per SBS
    Q_sbs: np.ndarray  # (T, S) max user backlog per SBS
    tau: np.ndarray  # (T, S) cache-update time charged that slot
    J_cloud: np.ndarray  # (T,)
    Q_cloud: np.ndarray  # (T,)
    labels: np.ndarray  # (T, S) SBS cluster id in force
    requests: np.ndarray  # (T,)
    hits: np.ndarray  # (T,)
    drops: np.ndarray  # (T,)
    queue_mean: np.ndarray  # (T,) mean backlog over nonempty user queues
    ccp_iterations: np.ndarray  # (T,) mean outer iterations of the slot's solves (nan if none)

    @property
    def horizon(self) -> int:
        return self.J_sbs.shape[0]

    @classmethod
    def allocate(cls, T: int, S: int) -> "RunRecord":
        return cls(
            J_sbs=np.zeros((T, S)),
            Q_sbs=np.zeros((T, S)),
            tau=np.zeros((T, S)),
            J_cloud=np.zeros(T),
            Q_cloud=np.zeros(T),
            labels=np.zeros((T, S), dtype=np.int64),
            requests=np.zeros(T, dtype=np.int64),
            hits=np.zeros(T, dtype=np.int64),
            drops=np.zeros(T, dtype=np.int64),
            queue_mean=np.zeros(T),
            ccp_iterations=np.full(T, np.nan),
        )


@dataclass
class WindowMetrics:
    start: int
    stop: int
    complete: bool
    upsilon_s: np.ndarray  # (S,)
    tau_s: np.ndarray  # (S,)
    upsilon_C: np.ndarray  # (K,)
    upsilon_c: float
    upsilon_T: float


@dataclass
class MetricsFrame:
    windows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return any(not w.complete for w in self.windows)


def _nested_mean(x: np.ndarray, T2: int) -> np.ndarray:
    """Mean over consecutive T2 blocks of the block means (first axis)."""
    blocks = [x[i:i + T2].mean(axis=0) for i in range(0, len(x), T2)]
    return np.mean(blocks, axis=0)


def window_metrics(rec: RunRecord, start: int, stop: int, T1: int, T2: int) -> WindowMetrics:
    sl = slice(start, stop)
    ups_s = _nested_mean(rec.J_sbs[sl], T2) + rec.Q_sbs[sl].mean(axis=0)
    tau_s = rec.tau[sl].mean(axis=0)
    ups_c = float(_nested_mean(rec.J_cloud[sl], T2) + rec.Q_cloud[sl].mean())
    labels = rec.labels[start]
    K = int(labels.max()) + 1
    per = ups_s + tau_s
    ups_C = np.array([per[labels == k].mean() for k in range(K) if np.any(labels == k)])
    return WindowMetrics(start, stop, stop - start == T1, ups_s, tau_s, ups_C, ups_c, ups_c + float(ups_C.mean()))


def aggregate_metrics(rec: RunRecord, T1: int, T2: int) -> MetricsFrame:
    """Windowed worst-case delay decomposition plus run-level summaries.

    Each ``T1`` window gives per-SBS, per-cluster, cloud and total costs; the
    run value of each metric is the mean over windows. A trailing window
    shorter than ``T1`` is kept and flagged as incomplete.
    """
    frame = MetricsFrame()
    T = rec.horizon
    if T == 0:
        return frame
    for start in range(0, T, T1):
        frame.windows.append(window_metrics(rec, start, min(start + T1, T), T1, T2))
    W = frame.windows
    req = int(rec.requests.sum())
    it = rec.ccp_iterations[~np.isnan(rec.ccp_iterations)]
    frame.summary = {
        "delay_total": float(np.mean([w.upsilon_T for w in W])),
        "delay_cloud": float(np.mean([w.upsilon_c for w in W])),
        "delay_access": float(np.mean([w.upsilon_C.mean() for w in W])),
        "hit_rate": float(rec.hits.sum() / req) if req else 0.0,
        "drops": float(rec.drops.sum()),
        "mean_queue": float(rec.queue_mean.mean()),
        "ccp_iterations": float(it.mean()) if it.size else 0.0,
    }
    return frame


def check_identity(frame: MetricsFrame, tol: float = 1e-9) -> None:
    for w in frame.windows:
        if abs(w.upsilon_T - (w.upsilon_c + w.upsilon_C.mean())) > tol:
            raise RuntimeError("total delay decomposition broken")


def mean_ci95(values) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width across seeds."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(1.96 * v.std(ddof=1) / np.sqrt(v.size))
