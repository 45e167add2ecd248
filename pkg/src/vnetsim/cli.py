"""Command line entry: train, evaluate, sweep."""

from __future__ import annotations

import argparse
import sys

from .config import AGENT_KINDS, AXES, load_config
from .harness import evaluate, run_sweep


def _parse_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _parse_ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seeds", default=None, help="comma-separated seeds")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--trace", action="store_true", default=None,
                   help="emit per-step trace CSVs for evaluation episodes")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vnetsim",
        description="Joint driving/network-selection simulator runs")
    sub = p.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("train", help="train one agent at the base scenario")
    _add_common(t)
    t.add_argument("--agent", choices=AGENT_KINDS, default=None)

    e = sub.add_parser("evaluate", help="greedy rollouts of a stored policy")
    e.add_argument("artifact", help="policy .npz written by train/sweep")
    _add_common(e)

    s = sub.add_parser("sweep", help="run an axis sweep over seeds")
    _add_common(s)
    s.add_argument("--agent", choices=AGENT_KINDS, default=None)
    s.add_argument("--axis", choices=[a for a in AXES if a != "none"],
                   default=None)
    s.add_argument("--values", default=None, help="comma-separated values")
    s.add_argument("--workers", type=int, default=None)
    return p


def _overrides_from(args: argparse.Namespace) -> dict:
    out = {}
    if getattr(args, "agent", None) is not None:
        out["agent"] = args.agent
    if getattr(args, "axis", None) is not None:
        out["axis"] = args.axis
    if getattr(args, "values", None) is not None:
        out["axis_values"] = _parse_floats(args.values)
    if args.seeds is not None:
        out["seeds"] = _parse_ints(args.seeds)
    if args.out is not None:
        out["out_dir"] = args.out
    if args.trace is not None:
        out["trace"] = args.trace
    if getattr(args, "workers", None) is not None:
        out["workers"] = args.workers
    if args.episodes is not None:
        if args.cmd == "evaluate":
            out["eval_episodes"] = args.episodes
        else:
            out["episodes"] = args.episodes
    return out


def _print_rows(rows) -> None:
    for r in rows:
        print(f"{r['agent']:>20} {r['axis']:>16}={r['axis_value']:<8g} "
              f"seed={r['seed']:<3d} reward={r['mean_reward_total']:.3f} "
              f"tq={r['mean_tq']:.3e} handoff={r['handoff_prob']:.4f} "
              f"collisions={r['collision_rate']:.5f} "
              f"v={r['mean_velocity']:.2f}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_config(args.config, overrides=_overrides_from(args))
        if args.cmd == "evaluate":
            row = evaluate(args.artifact, sc)
            _print_rows([row])
        else:
            if args.cmd == "train" and sc.axis != "none":
                raise ValueError("train runs the base scenario; "
                                 "use sweep for axis runs")
            rows = run_sweep(sc)
            _print_rows(rows)
    except (ValueError, OSError) as exc:
        print(f"vnetsim: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
