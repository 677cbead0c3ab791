"""Command line entry point: ``edgesim simulate | report | topology``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path


from .config import load_config
from .sim import METHODS
from .sweep import RunPlan, run_sweep


def parse_seeds(text: str) -> list[int]:
    """``"0-4"``, ``"1,3,7"`` or a mix such as ``"0-2,9"``."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError("no seeds given")
    return seeds


def parse_methods(values: list[str]) -> list[str]:
    out = []
    for v in values:
        for m in v.split(","):
            m = m.strip().upper()
            if m not in METHODS:
                raise argparse.ArgumentTypeError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
            if m not in out:
                out.append(m)
    return out


def parse_sweep(text: str | None):
    if not text:
        return None, [0.0]
    axis, _, vals = text.partition("=")
    if not vals:
        raise argparse.ArgumentTypeError("--sweep expects <axis>=<v1,v2,...>")
    return axis.strip(), [float(v) for v in vals.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edgesim", description="Cache-aided small-cell network simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("simulate", help="run methods over a sweep grid and seeds")
    s.add_argument("--config", type=Path, help="flat YAML/JSON file mirroring SimConfig fields")
    s.add_argument("--method", action="append", default=None, help="pc, pnc, b1, b2 (repeat or comma-separate)")
    s.add_argument("--sweep", help="<axis>=<v1,v2,...>, e.g. lambda_ue=0.02,0.04,0.08")
    s.add_argument("--seeds", default="0", type=parse_seeds)
    s.add_argument("--horizon", type=int, default=3000)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--resume", action="store_true", help="skip cells already in the manifest")
    s.add_argument("--trace-export", action="store_true", help="write the shared request traces as CSV")
    s.add_argument("--debug", action="store_true", help="dump phase log, clusters, learner checkpoints, CCP traces")
    s.add_argument("--report", action="store_true", help="render figures when done")

    r = sub.add_parser("report", help="render figures next to a sweep's CSV files")
    r.add_argument("--out", type=Path, required=True)

    t = sub.add_parser("topology", help="export one seed's node placement as JSON")
    t.add_argument("--config", type=Path)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.cmd == "simulate":
        cfg = load_config(args.config)
        axis, values = parse_sweep(args.sweep)
        plan = RunPlan(
            methods=parse_methods(args.method or ["pc"]),
            axis=axis,
            values=values,
            seeds=args.seeds,
            horizon=args.horizon,
            out_dir=args.out,
            base=cfg,
            resume=args.resume,
            trace_export=args.trace_export,
            debug=args.debug,
        )
        out = run_sweep(plan)
        print(f"wrote {out / 'metrics.csv'} and {out / 'summary.csv'}")
        if args.report:
            from .plotting import render_report

            for path in render_report(out):
                print(f"wrote {path}")
    elif args.cmd == "report":
        from .plotting import render_report

        for path in render_report(args.out):
            print(f"wrote {path}")
    elif args.cmd == "topology":
        from .sim import Streams
        from .topology import sample_topology

        cfg = load_config(args.config)
        net = sample_topology(cfg, Streams.from_seed(args.seed).topology)
        text = net.to_json(args.seed)
        if args.out:
            args.out.write_text(text)
        else:
            print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
