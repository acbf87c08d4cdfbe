"""Command-line entry points.

Exit codes: 0 success, 1 runtime failure, 2 bad usage or configuration.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .agent import SacAgent
from .channel import SeTraceFormatError, load_se_trace
from .config import (
    VARIANT_BASELINE,
    VARIANT_VIDEO_HAPTIC,
    ConfigError,
    RunConfig,
    load_run_config,
)
from .experiment import (
    AgentPolicy,
    FixedSplitPolicy,
    evaluate_agent,
    load_manifest,
    read_results_csv,
    run_sweep_to_dir,
    run_trial,
    train_agent,
    write_manifest,
)
from .traffic import TraceFormatError, load_haptic_trace, trace_summary
from .world import OBS_DIM

_VARIANT_ALIASES = {
    "vh": VARIANT_VIDEO_HAPTIC,
    "video_haptic": VARIANT_VIDEO_HAPTIC,
    "baseline": VARIANT_BASELINE,
}


def _out_dir(args) -> str:
    out = args.out_dir or os.environ.get("VHSLICE_OUT") or "runs"
    os.makedirs(out, exist_ok=True)
    return out


def _load_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    trial_updates = {}
    if getattr(args, "seed", None) is not None:
        trial_updates["seed"] = args.seed
    if getattr(args, "t_slice", None) is not None:
        trial_updates["t_slice_ms"] = args.t_slice
    if getattr(args, "variant", None) is not None:
        trial_updates["variant"] = _VARIANT_ALIASES[args.variant]
    if getattr(args, "training_ttis", None) is not None:
        trial_updates["training_ttis"] = args.training_ttis
    if trial_updates:
        cfg = cfg.replace_trial(**trial_updates)
    return cfg


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="training/trial seed")
    parser.add_argument("--t-slice", type=int, dest="t_slice",
                        help="decision interval in ms")
    parser.add_argument("--variant", choices=sorted(_VARIANT_ALIASES),
                        help="reward variant")
    parser.add_argument("--out-dir", dest="out_dir",
                        help="output directory (default $VHSLICE_OUT or runs/)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vhslice",
        description="Radio-resource slicing simulator with a SAC allocator "
                    "for paired haptic and video flows.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an allocation agent")
    _add_common(p_train)
    p_train.add_argument("--training-ttis", type=int, dest="training_ttis",
                         help="override training horizon in TTIs")

    p_eval = sub.add_parser("eval", help="evaluate a policy on held-out seeds")
    _add_common(p_eval)
    p_eval.add_argument("--checkpoint", help="agent checkpoint directory; "
                        "omit for a fixed even split")
    p_eval.add_argument("--eval-seed", type=int, action="append",
                        dest="eval_seeds", help="held-out seed (repeatable)")
    p_eval.add_argument("--kpi-log", dest="kpi_log", action="store_true",
                        help="write per-TTI per-link KPI logs")

    p_sweep = sub.add_parser("sweep", help="train and evaluate over a grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--name", required=True,
                         choices=("users", "se", "fluctuation", "intervals"))
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel worker processes")
    p_sweep.add_argument("--sweep-seed", type=int, action="append",
                         dest="sweep_seeds",
                         help="training seed for the sweep (repeatable)")
    p_sweep.add_argument("--training-ttis", type=int, dest="training_ttis",
                         help="override training horizon in TTIs")

    p_val = sub.add_parser("validate-trace", help="check a trace file")
    p_val.add_argument("--haptic", help="haptic arrival trace CSV")
    p_val.add_argument("--se", help="spectral-efficiency trace CSV")

    p_plot = sub.add_parser("plot", help="render SVG figures from results")
    p_plot.add_argument("--results", help="results CSV from a sweep")
    p_plot.add_argument("--sweep", help="sweep name for axis labels")
    p_plot.add_argument("--training-log", dest="training_log",
                        help="training log CSV")
    p_plot.add_argument("--out", required=True, help="output SVG path")

    p_rerun = sub.add_parser("rerun", help="repeat a sweep from its manifest")
    p_rerun.add_argument("manifest", help="manifest.json from a prior sweep")
    p_rerun.add_argument("--jobs", type=int, default=1)
    p_rerun.add_argument("--out-dir", dest="out_dir")
    return parser


def _cmd_train(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    log_path = os.path.join(out, "training_log.csv")
    agent = train_agent(cfg, cfg.trial.seed, log_path=log_path)
    ckpt = os.path.join(out, "checkpoint")
    agent.save(ckpt)
    write_manifest(os.path.join(out, "manifest.json"), cfg, "train",
                   {"seed": cfg.trial.seed})
    print(f"trained for {cfg.trial.training_ttis} TTIs "
          f"(variant={cfg.trial.variant}, t_slice={cfg.trial.t_slice_ms} ms)")
    print(f"checkpoint: {ckpt}")
    print(f"training log: {log_path}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    if args.checkpoint:
        agent = SacAgent.load(args.checkpoint)
        policy = AgentPolicy(agent)
        label = "agent"
    else:
        policy = FixedSplitPolicy(cfg.ran.num_rbs // 2)
        label = "fixed even split"
    seeds = tuple(args.eval_seeds) if args.eval_seeds else cfg.trial.eval_seeds
    srs = []
    for s in seeds:
        kpi_path = (os.path.join(out, f"kpi_seed{s}.csv")
                    if args.kpi_log else None)
        res = run_trial(cfg, policy, (s, 2), kpi_log_path=kpi_path)
        srs.append(res.sr)
        print(f"seed {s}: sr={res.sr:.4f} all_pairs_sr={res.sr_all_pairs:.4f} "
              f"mean_reward={res.mean_reward:.4f}")
    print(f"{label}: mean sr over {len(seeds)} seeds = "
          f"{float(np.mean(srs)):.4f}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    seeds = tuple(args.sweep_seeds) if args.sweep_seeds else None
    csv_path = run_sweep_to_dir(args.name, cfg, out, seeds=seeds,
                                jobs=args.jobs)
    from .plots import plot_intervals, plot_sweep

    rows = read_results_csv(csv_path)
    svg_path = os.path.join(out, f"{args.name}.svg")
    if args.name == "intervals":
        plot_intervals(rows, svg_path)
    else:
        plot_sweep(rows, args.name, svg_path)
    print(f"results: {csv_path}")
    print(f"figure: {svg_path}")
    return 0


def _cmd_validate_trace(args) -> int:
    if not args.haptic and not args.se:
        print("validate-trace: provide --haptic and/or --se", file=sys.stderr)
        return 2
    if args.haptic:
        trace = load_haptic_trace(args.haptic)
        info = trace_summary(trace)
        print(f"{args.haptic}: ok ({info['samples']} samples, "
              f"{info['duration_ms']:.1f} ms, "
              f"{info['mean_rate_bps']:.0f} bit/s)")
    if args.se:
        matrix = load_se_trace(args.se)
        print(f"{args.se}: ok ({matrix.size} samples, {matrix.shape[1]} links, "
              f"{matrix.shape[0]} TTIs)")
    return 0


def _cmd_plot(args) -> int:
    from .plots import plot_intervals, plot_sweep, plot_training_log

    if args.results:
        rows = read_results_csv(args.results)
        sweep = args.sweep or (rows[0]["sweep"] if rows else "users")
        if sweep == "intervals":
            plot_intervals(rows, args.out)
        else:
            plot_sweep(rows, sweep, args.out)
    elif args.training_log:
        plot_training_log(args.training_log, args.out)
    else:
        print("plot: provide --results or --training-log", file=sys.stderr)
        return 2
    print(f"figure: {args.out}")
    return 0


def _cmd_rerun(args) -> int:
    cfg, doc = load_manifest(args.manifest)
    if doc.get("command") != "sweep" or "sweep" not in doc:
        print(f"{args.manifest}: not a sweep manifest", file=sys.stderr)
        return 2
    out = args.out_dir or os.environ.get("VHSLICE_OUT") or "runs"
    os.makedirs(out, exist_ok=True)
    csv_path = run_sweep_to_dir(doc["sweep"], cfg, out,
                                seeds=doc.get("seeds"),
                                variants=doc.get("variants") or None,
                                jobs=args.jobs)
    print(f"results: {csv_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "train": _cmd_train,
        "eval": _cmd_eval,
        "sweep": _cmd_sweep,
        "validate-trace": _cmd_validate_trace,
        "plot": _cmd_plot,
        "rerun": _cmd_rerun,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, TraceFormatError, SeTraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
