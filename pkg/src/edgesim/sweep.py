"""Parameter sweeps: run every (method, value, seed) cell, write per-run metric
rows, a cross-seed summary and a JSON manifest that makes reruns resumable."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SWEEP_AXES, SimConfig, apply_axis
from .demand import write_trace
from .metrics import aggregate_metrics, check_identity, mean_ci95
from .sim import METHODS, World, build_trace

log = logging.getLogger(__name__)

CSV_HEADER = ["run_id", "method", "sweep_param", "value", "metric", "mean", "ci95"]
WINDOW_METRICS = ("delay_total", "delay_cloud", "delay_access")


def fmt(x) -> str:
    return f"{float(x):.10g}"


@dataclass
class RunPlan:
    methods: list
    axis: str | None
    values: list
    seeds: list
    horizon: int
    out_dir: Path
    base: SimConfig = field(default_factory=SimConfig)
    resume: bool = False
    trace_export: bool = False
    debug: bool = False

    def validate(self) -> None:
        if not self.methods or not self.values or not self.seeds:
            raise ValueError("run plan needs at least one method, one value and one seed")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        if self.axis is not None and self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if self.horizon < self.base.T1:
            raise ValueError(f"horizon {self.horizon} is shorter than T1={self.base.T1}")

    @property
    def param(self) -> str:
        return self.axis or "base"

    def config_for(self, value) -> SimConfig:
        return self.base if self.axis is None else apply_axis(self.base, self.axis, value)

    def run_id(self, method: str, value, seed: int) -> str:
        return f"{method}-{self.param}={fmt(value)}-s{seed}"

    def cells(self):
        for value in self.values:
            for seed in self.seeds:
                for method in self.methods:
                    yield method, value, seed


def run_rows(run_id: str, method: str, param: str, value, world: World) -> list[list[str]]:
    """Metric rows for one run: window mean and window ci95 for the delay terms."""
    cfg = world.cfg
    frame = aggregate_metrics(world.record, cfg.T1, cfg.T2)
    check_identity(frame)
    per_window = {
        "delay_total": [w.upsilon_T for w in frame.windows],
        "delay_cloud": [w.upsilon_c for w in frame.windows],
        "delay_access": [float(w.upsilon_C.mean()) for w in frame.windows],
    }
    rows = []
    for name, val in frame.summary.items():
        ci = mean_ci95(per_window[name])[1] if name in per_window else 0.0
        rows.append([run_id, method, param, fmt(value), name, fmt(val), fmt(ci)])
    return rows


def _write_csv(path: Path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _read_rows(path: Path) -> list[list[str]]:
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[1:]


def summarize(plan: RunPlan, rows: list[list[str]]) -> list[list[str]]:
    """Cross-seed mean and ci95 per (method, value, metric)."""
    groups: dict[tuple, list[float]] = {}
    for run_id, method, param, value, metric, mean, _ in rows:
        groups.setdefault((method, param, value, metric), []).append(float(mean))
    out = []
    for (method, param, value, metric), vals in groups.items():
        m, ci = mean_ci95(vals)
        out.append([f"{method}-{param}={value}", method, param, value, metric, fmt(m), fmt(ci)])
    return out


def _debug_dump(world: World, path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
    (path / "phases.log").write_text("\n".join(world.phase_log) + "\n")
    (path / "clusters.json").write_text(json.dumps(world.cluster_log, indent=1))
    (path / "learners.jsonl").write_text("\n".join(world.checkpoints) + ("\n" if world.checkpoints else ""))
    with (path / "ccp.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "iterate", "objective"])
        w.writerows([[i, k, fmt(o)] for i, k, o in world.ccp_log])
    with (path / "decisions.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["slot", "sbs", "user", "rb", "content"])
        w.writerows(world.decision_rows)


def run_sweep(plan: RunPlan) -> Path:
    """Run all cells of ``plan`` and write ``metrics.csv``, ``summary.csv`` and
    ``manifest.json`` under ``plan.out_dir``. Returns the output directory."""
    plan.validate()
    out = Path(plan.out_dir)
    try:
        (out / "runs").mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc

    man_path = out / "manifest.json"
    manifest = {"runs": {}}
    if plan.resume and man_path.exists():
        manifest = json.loads(man_path.read_text())
    manifest["plan"] = {
        "methods": list(plan.methods),
        "axis": plan.param,
        "values": [float(v) for v in plan.values],
        "seeds": [int(s) for s in plan.seeds],
        "horizon": int(plan.horizon),
        "base_config": plan.base.to_dict(),
    }

    traces: dict[tuple, np.ndarray] = {}
    all_rows = []
    for method, value, seed in plan.cells():
        rid = plan.run_id(method, value, seed)
        run_file = out / "runs" / f"{rid}.csv"
        if plan.resume and rid in manifest["runs"] and run_file.exists():
            all_rows.extend(_read_rows(run_file))
            continue
        cfg = plan.config_for(value)
        key = (fmt(value), seed)
        if key not in traces:
            # every method under this (value, seed) replays the same requests
            traces[key] = build_trace(cfg, seed, plan.horizon)[2]
            if plan.trace_export:
                (out / "traces").mkdir(exist_ok=True)
                write_trace(out / "traces" / f"{plan.param}={fmt(value)}-s{seed}.csv", traces[key])
        log.info("running %s", rid)
        world = World(cfg, method, seed, plan.horizon, trace=traces[key], debug=plan.debug)
        world.run()
        rows = run_rows(rid, method, plan.param, value, world)
        _write_csv(run_file, rows)
        if plan.debug:
            _debug_dump(world, out / "debug" / rid)
        manifest["runs"][rid] = {
            "method": method,
            "sweep_param": plan.param,
            "value": float(value),
            "seed": int(seed),
            "config": cfg.to_dict(),
            "metrics_file": f"runs/{rid}.csv",
        }
        all_rows.extend(rows)
        man_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))

    _write_csv(out / "metrics.csv", all_rows)
    _write_csv(out / "summary.csv", summarize(plan, all_rows))
    man_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return out


def load_summary(out_dir) -> list[dict]:
    with (Path(out_dir) / "summary.csv").open(newline="") as fh:
        return list(csv.DictReader(fh))
