"""Figures for a finished sweep, written next to its CSV files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import load_summary  # noqa: E402

STYLE = {"PC": ("tab:blue", "o"), "PNC": ("tab:green", "s"), "B1": ("tab:red", "^"), "B2": ("tab:orange", "v")}
LABELS = {
    "delay_total": "worst-case delay [slots]",
    "delay_access": "access delay [slots]",
    "delay_cloud": "fronthaul delay [slots]",
    "hit_rate": "cache hit rate",
    "drops": "dropped requests",
    "mean_queue": "mean backlog [packets]",
    "ccp_iterations": "CCP iterations",
}


def render_report(out_dir, metrics=("delay_total", "delay_access", "delay_cloud", "hit_rate")) -> list[Path]:
    """One PNG per metric: cross-seed mean with 95% error bars per method."""
    out = Path(out_dir)
    rows = load_summary(out)
    written = []
    for metric in metrics:
        sel = [r for r in rows if r["metric"] == metric]
        if not sel:
            continue
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for method in sorted({r["method"] for r in sel}, key=lambda m: list(STYLE).index(m) if m in STYLE else 99):
            pts = sorted((float(r["value"]), float(r["mean"]), float(r["ci95"])) for r in sel if r["method"] == method)
            x, y, e = zip(*pts)
            color, marker = STYLE.get(method, (None, "o"))
            ax.errorbar(x, y, yerr=e, label=method, color=color, marker=marker, capsize=3, lw=1.2)
        ax.set_xlabel(sel[0]["sweep_param"])
        ax.set_ylabel(LABELS.get(metric, metric))
        ax.grid(alpha=0.3)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        path = out / f"{metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
