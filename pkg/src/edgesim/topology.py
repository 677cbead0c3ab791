"""Node placement, per-slot channel gains and signal quality."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig


class DegenerateTopology(ValueError):
    pass


@dataclass
class NetworkState:
    sbs_positions: np.ndarray  # (S, 2)
    ue_positions: np.ndarray  # (U, 2)
    distances: np.ndarray  # (S, U), clamped at min_distance
    pathloss: np.ndarray  # (S, U) linear gain
    channel_gain: np.ndarray  # (S, U, M)
    rb_inventory: np.ndarray  # (S,) int
    slot: int = 0

    @property
    def num_sbs(self) -> int:
        return self.sbs_positions.shape[0]

    @property
    def num_ue(self) -> int:
        return self.ue_positions.shape[0]

    def coverage(self, radius: float) -> np.ndarray:
        """Boolean (S, U) matrix: UE u lies within ``radius`` of SBS s."""
        raw = np.linalg.norm(self.sbs_positions[:, None, :] - self.ue_positions[None, :, :], axis=-1)
        return raw <= radius

    def to_json(self, seed: int | None = None) -> str:
        return json.dumps(
            {
                "seed": seed,
                "sbs_positions": self.sbs_positions.tolist(),
                "ue_positions": self.ue_positions.tolist(),
            },
            indent=2,
        )


def pathloss_gain(dist: np.ndarray, cfg: SimConfig) -> np.ndarray:
    d = np.maximum(dist, cfg.min_distance)
    loss_db = cfg.pathloss_ref_db + 10.0 * cfg.pathloss_exponent * np.log10(d)
    return 10.0 ** (-loss_db / 10.0)


def _draw_count(rng: np.random.Generator, mean: float, retries: int) -> int:
    for _ in range(retries):
        n = int(rng.poisson(mean))
        if n > 0:
            return n
    raise DegenerateTopology("degenerate topology")


def sample_topology(cfg: SimConfig, rng: np.random.Generator) -> NetworkState:
    """Poisson node counts placed uniformly in the square; equal initial RB split.

    The simulator overwrites ``rb_inventory`` once clusters are known.
    """
    n_sbs = _draw_count(rng, cfg.lambda_sbs * cfg.area, cfg.max_topology_retries)
    n_ue = _draw_count(rng, cfg.lambda_ue * cfg.area, cfg.max_topology_retries)
    sbs = rng.uniform(0.0, cfg.area_side, size=(n_sbs, 2))
    ue = rng.uniform(0.0, cfg.area_side, size=(n_ue, 2))
    raw = np.linalg.norm(sbs[:, None, :] - ue[None, :, :], axis=-1)
    dist = np.maximum(raw, cfg.min_distance)
    pl = pathloss_gain(dist, cfg)
    inv = np.full(n_sbs, cfg.num_rbs, dtype=np.int64)
    return NetworkState(
        sbs_positions=sbs,
        ue_positions=ue,
        distances=dist,
        pathloss=pl,
        channel_gain=np.repeat(pl[:, :, None], cfg.num_rbs, axis=2),
        rb_inventory=inv,
    )


def step_channel(state: NetworkState, rng: np.random.Generator) -> NetworkState:
    """Redraw Rayleigh-power fading for every (s, u, m) and advance the slot."""
    fading = rng.exponential(1.0, size=state.channel_gain.shape)
    state.channel_gain = state.pathloss[:, :, None] * fading
    state.slot += 1
    return state


def cinr(gain, noise_power, est_interference):
    """Channel-to-interference-plus-noise ratio ``gain / (noise + interference)``.

    ``noise_power`` is the per-RB noise power (noise PSD times RB bandwidth).
    Broadcasts over arrays.
    """
    return np.asarray(gain, dtype=float) / (noise_power + np.asarray(est_interference, dtype=float))
