"""Simulation configuration.

All scalar knobs of the simulator live in :class:`SimConfig`. Units follow the
field comments: distances in meters, powers in watts, capacities in bits per
slot, times in slots. Rates produced by the physical layer are
``alpha * bandwidth * slot_duration * log2(1 + sinr)`` bits per slot.

A config can be loaded from a flat JSON or YAML document whose keys mirror the
field names, and any field can be overridden through an ``EDGESIM_<FIELD>``
environment variable.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import yaml


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


@dataclass(frozen=True)
class SimConfig:
    # geometry
    area_side: float = 10.0  # m
    lambda_sbs: float = 0.06  # nodes / m^2
    lambda_ue: float = 0.04
    coverage_frac: float = 0.75  # coverage radius as a fraction of area_side
    max_topology_retries: int = 100
    # radio
    num_rbs: int = 6
    bandwidth_per_rb: float = 1.4e6  # Hz
    tx_power_max: float = dbm_to_watts(23.0)  # W
    noise_psd: float = dbm_to_watts(-174.0)  # W/Hz
    pathloss_exponent: float = 3.5
    pathloss_ref_db: float = 38.5  # loss at 1 m
    min_distance: float = 1.0  # m
    slot_duration: float = 1e-2  # s
    alpha: float = 0.5  # access-link share of the slot
    fronthaul_capacity: float = 480000.0  # bits / slot
    # content
    catalog_size: int = 20
    cache_size: int = 4
    max_cache_updates: int = 2
    bits_per_packet: int = 16000
    mean_content_packets: float = 2.0
    qos_latency_min: int = 10  # slots
    qos_latency_max: int = 30
    request_prob: float = 0.5  # per user per slot
    zipf_init_min: float = 0.8
    zipf_init_max: float = 1.4
    zipf_drift_var: float = 0.1
    zipf_min: float = 0.05
    redraw_permutation: bool = False
    # costs
    cost_floor: float = 16000.0  # bits / slot, keeps latency finite at zero rate
    cache_update_form: str = "printed"  # or "corrected"
    # timescales
    T1: int = 300
    T2: int = 10
    T_FIX: int = 10
    # learning
    beta: float = 0.5
    xi_s: float = 0.02
    xi_c: float = 0.05
    gamma1: float = 0.75
    gamma2: float = 0.65
    gamma3: float = 0.55
    clip_regret: bool = False
    action_cap: int = 10_000
    # clustering
    sigma_c_sq: float = 1.0
    max_clusters: int = 8
    # scheduling
    lyapunov_V: float = 10.0
    epsilon_u: float = 0.05
    epsilon_s: float = 0.05
    interference_smoothing: float = 0.8
    pf_memory: float = 0.99
    ccp_max_outer: int = 5
    ccp_tol: float = 1e-3
    ccp_gap_tol: float = 1e-3
    max_pairs_per_user: int = 3
    inner_max_iter: int = 500
    rng_seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        errs = []
        if not 0.0 <= self.alpha <= 1.0:
            errs.append("alpha must lie in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            errs.append("beta must lie in [0, 1]")
        if self.xi_s <= 0 or self.xi_c <= 0:
            errs.append("temperatures must be positive")
        if self.lyapunov_V < 1:
            errs.append("lyapunov_V must be >= 1")
        if not self.gamma1 > self.gamma2 > self.gamma3 > 0:
            errs.append("learning rates must satisfy gamma1 > gamma2 > gamma3 > 0")
        if self.cache_size > self.catalog_size:
            errs.append("cache_size must not exceed catalog_size")
        if self.max_cache_updates < 1:
            errs.append("max_cache_updates must be >= 1")
        if self.num_rbs < 1:
            errs.append("num_rbs must be >= 1")
        if not self.T1 > self.T2 >= 1:
            errs.append("timescales must satisfy T1 > T2 >= 1")
        if self.max_pairs_per_user < 1:
            errs.append("max_pairs_per_user must be >= 1")
        if self.T_FIX < 1:
            errs.append("T_FIX must be >= 1")
        if not 0.0 < self.interference_smoothing < 1.0:
            errs.append("interference_smoothing must lie in (0, 1)")
        if not 0.0 <= self.request_prob <= 1.0:
            errs.append("request_prob must lie in [0, 1]")
        if self.cost_floor <= 0:
            errs.append("cost_floor must be positive")
        if self.noise_psd <= 0:
            errs.append("noise_psd must be positive")
        if self.lambda_sbs < 0 or self.lambda_ue < 0:
            errs.append("densities must be non-negative")
        if not 0.0 <= self.epsilon_u <= 1.0 or not 0.0 <= self.epsilon_s <= 1.0:
            errs.append("epsilons must be probabilities")
        if self.cache_update_form not in ("printed", "corrected"):
            errs.append("cache_update_form must be 'printed' or 'corrected'")
        if self.mean_content_packets < 1:
            errs.append("mean_content_packets must be >= 1")
        if self.qos_latency_min <= 0 or self.qos_latency_max < self.qos_latency_min:
            errs.append("qos latency range invalid")
        if errs:
            raise ValueError("; ".join(errs))

    @property
    def area(self) -> float:
        return self.area_side**2

    @property
    def coverage_radius(self) -> float:
        return self.coverage_frac * self.area_side

    @property
    def packet_rate_scale(self) -> float:
        """Packets per slot delivered by one RB at unit spectral efficiency."""
        return self.alpha * self.bandwidth_per_rb * self.slot_duration / self.bits_per_packet

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **coerce_fields(changes))

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}

# short names accepted on the command line for sweep axes
SWEEP_AXES = {
    "lambda_sbs": "lambda_sbs",
    "lambda_ue": "lambda_ue",
    "X": "fronthaul_capacity",
    "fronthaul_capacity": "fronthaul_capacity",
    "rho_req": "request_prob",
    "request_prob": "request_prob",
    "d": "cache_size",
    "cache_size": "cache_size",
    "beta": "beta",
    "alpha": "alpha",
    "epsilon": "epsilon",
}


def _coerce(name: str, value: Any) -> Any:
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if kind == "int":
        if isinstance(value, str):
            value = float(value)
        if float(value) != int(value):
            raise ValueError(f"{name} must be an integer, got {value}")
        return int(value)
    if kind == "float":
        return float(value)
    return str(value)


def coerce_fields(values: Mapping[str, Any]) -> dict[str, Any]:
    out = {}
    for k, v in values.items():
        if k not in _FIELD_TYPES:
            raise KeyError(f"unknown config field {k!r}")
        out[k] = _coerce(k, v)
    return out


def apply_axis(cfg: SimConfig, axis: str, value: float) -> SimConfig:
    """Return ``cfg`` with a sweep axis set; ``epsilon`` sets both epsilons."""
    if axis not in SWEEP_AXES:
        raise KeyError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    name = SWEEP_AXES[axis]
    if name == "epsilon":
        return cfg.replace(epsilon_u=value, epsilon_s=value)
    return cfg.replace(**{name: value})


def load_config(path: str | os.PathLike | None = None, env: Mapping[str, str] | None = None) -> SimConfig:
    """Load a flat JSON/YAML config then apply ``EDGESIM_*`` overrides."""
    values: dict[str, Any] = {}
    if path is not None:
        text = Path(path).read_text()
        if str(path).endswith(".json"):
            values = json.loads(text)
        else:
            values = yaml.safe_load(text) or {}
        if not isinstance(values, dict):
            raise ValueError("config file must hold a flat key/value mapping")
    env = os.environ if env is None else env
    by_upper = {name.upper(): name for name in _FIELD_TYPES}
    for key, raw in env.items():
        if key.startswith("EDGESIM_"):
            # unknown suffixes are left alone for other tools sharing the prefix
            name = by_upper.get(key[len("EDGESIM_"):].upper())
            if name is not None:
                values[name] = raw
    return SimConfig(**coerce_fields(values))
