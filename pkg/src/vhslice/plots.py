"""Headless SVG figures for sweep results and training logs."""

from __future__ import annotations

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .config import VARIANTS, ConfigError  # noqa: E402

_STYLES = {"video_haptic": ("o", "-"), "baseline": ("s", "--")}
_XLABELS = {
    "users": "operator-teleoperator pairs",
    "se": "mean spectral efficiency (bit/s/Hz)",
    "fluctuation": "channel fluctuation amplitude",
    "intervals": "decision interval (ms)",
}

# stable SVG ids so reruns produce identical bytes
matplotlib.rcParams["svg.hashsalt"] = "vhslice"


def _group_rows(rows):
    """-> {variant: {param_value: [sr, ...]}} keeping seed replicates."""
    grouped: dict[str, dict[float, list[float]]] = defaultdict(
        lambda: defaultdict(list))
    for row in rows:
        grouped[row["variant"]][float(row["param_value"])].append(
            float(row["sr"]))
    return grouped


def plot_sweep(rows: list[dict], sweep: str, out_path: str) -> str:
    """Satisfaction rate versus the swept parameter, one line per variant."""
    if not rows:
        raise ConfigError("no result rows to plot")
    grouped = _group_rows(rows)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for variant in VARIANTS:
        if variant not in grouped:
            continue
        marker, line = _STYLES.get(variant, ("^", ":"))
        xs = sorted(grouped[variant])
        ys = [sum(grouped[variant][x]) / len(grouped[variant][x]) for x in xs]
        ax.plot(xs, ys, marker=marker, linestyle=line, label=variant)
    ax.set_xlabel(_XLABELS.get(sweep, sweep))
    ax.set_ylabel("satisfaction rate")
    ax.set_ylim(-0.02, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path


def plot_intervals(rows: list[dict], out_path: str) -> str:
    """Grouped bars of satisfaction rate per decision interval."""
    if not rows:
        raise ConfigError("no result rows to plot")
    grouped = _group_rows(rows)
    values = sorted({float(r["param_value"]) for r in rows})
    variants = [v for v in VARIANTS if v in grouped]
    width = 0.8 / max(len(variants), 1)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for k, variant in enumerate(variants):
        xs = []
        ys = []
        for i, value in enumerate(values):
            if value not in grouped[variant]:
                continue
            samples = grouped[variant][value]
            xs.append(i + (k - (len(variants) - 1) / 2) * width)
            ys.append(sum(samples) / len(samples))
        ax.bar(xs, ys, width=width, label=variant)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels([f"{v:g}" for v in values])
    ax.set_xlabel(_XLABELS["intervals"])
    ax.set_ylabel("satisfaction rate")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path


def plot_training_log(log_path: str, out_path: str, window: int = 200) -> str:
    """Reward (smoothed) and entropy coefficient over training steps."""
    steps = []
    rewards = []
    coeffs = []
    with open(log_path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            steps.append(int(row["step"]))
            rewards.append(float(row["reward"]))
            coeffs.append(float(row["lambda"]) if row["lambda"] else None)
    if not steps:
        raise ConfigError(f"{log_path}: empty training log")
    smooth = []
    acc = 0.0
    for i, r in enumerate(rewards):
        acc += r
        if i >= window:
            acc -= rewards[i - window]
        smooth.append(acc / min(i + 1, window))
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.6, 4.8), sharex=True)
    ax1.plot(steps, rewards, alpha=0.25, label="reward")
    ax1.plot(steps, smooth, label=f"mean over {window}")
    ax1.set_ylabel("reward")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    known = [(s, c) for s, c in zip(steps, coeffs) if c is not None]
    if known:
        ax2.plot([s for s, _ in known], [c for _, c in known])
    ax2.set_ylabel("entropy coefficient")
    ax2.set_xlabel("decision step")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
