"""Joint edge caching, user scheduling and RB allocation simulator for
cloud-aided small-cell networks."""

from .config import SimConfig, load_config
from .metrics import MetricsFrame, RunRecord, aggregate_metrics
from .sim import METHODS, World, run_slot, simulate
from .sweep import RunPlan, run_sweep

__all__ = [
    "METHODS",
    "MetricsFrame",
    "RunPlan",
    "RunRecord",
    "SimConfig",
    "World",
    "aggregate_metrics",
    "load_config",
    "run_slot",
    "run_sweep",
    "simulate",
]
__version__ = "0.1.0"
