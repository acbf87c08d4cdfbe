"""Trials, agent training, sweeps, and their on-disk artefacts.

A *trial* runs one seeded world for ``trial_ttis`` TTIs under a policy and
scores the satisfaction rate: the per-pair fraction of post-warmup TTIs in
which every requirement of every flow the pair owns holds, averaged over
pairs (the all-pairs-simultaneous variant is also recorded).  A *sweep*
trains one agent per (point, variant, seed) and evaluates it on held-out
seeds, emitting one results row per combination.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .accel import NUMBA_ENABLED
from .agent import SacAgent
from .config import (
    SLICE_NAMES,
    VARIANTS,
    ConfigError,
    RunConfig,
    run_config_from_dict,
)
from .ran import check_satisfaction, pair_satisfaction
from .reward import total_reward
from .world import OBS_DIM, World

RESULTS_HEADER = ("sweep", "param_value", "variant", "t_slice_ms", "seed",
                  "sr", "mean_reward")
TRAINING_LOG_HEADER = ("step", "reward", "critic1_loss", "critic2_loss",
                       "actor_loss", "lambda")
KPI_LOG_HEADER = ("tti", "slice", "user", "tau_ms", "rho", "rate_bps",
                  "buffer_bits", "se", "satisfied")

SWEEPS = {
    "users": ("pairs", (10, 15, 20, 25)),
    "se": ("mean_se", (4.5, 5.0, 5.5)),
    "fluctuation": ("fluctuation", (0.0, 0.25, 0.5)),
    "intervals": ("t_slice_ms", (1, 10, 50)),
}


def build_world(cfg: RunConfig, seed) -> World:
    """Construct a seeded world (validates the configuration)."""
    return World(cfg, seed)


class FixedSplitPolicy:
    """Constant inter-slice split, for sanity runs and oracles."""

    def __init__(self, haptic_rbs: int):
        self.haptic_rbs = haptic_rbs

    def decide(self, world: World, stats) -> int:
        return self.haptic_rbs


class AgentPolicy:
    """Wraps a trained agent; deterministic by default."""

    def __init__(self, agent: SacAgent, deterministic: bool = True):
        self.agent = agent
        self.deterministic = deterministic

    def decide(self, world: World, stats) -> int:
        obs = world.observation(stats)
        return self.agent.act(obs, deterministic=self.deterministic).haptic_rbs


@dataclass(frozen=True)
class TrialResult:
    sr: float
    sr_all_pairs: float
    per_pair_sr: np.ndarray
    mean_reward: float
    decisions: int
    horizon: int
    warmup: int


def run_trial(cfg: RunConfig, policy, seed, kpi_log_path: str | None = None) -> TrialResult:
    """Run one world to its horizon under ``policy`` and score it."""
    world = build_world(cfg, seed)
    reward_cfg = cfg.reward()
    t_slice = cfg.trial.t_slice_ms
    warmup = cfg.warmup_ttis
    horizon = world.horizon
    if warmup >= horizon:
        raise ConfigError("warmup_ttis must be smaller than trial_ttis")

    sat_counts = np.zeros(world.pairs, dtype=np.int64)
    sat_all = 0
    counted = 0
    rewards = []
    decisions = 0

    log_fh = None
    log_writer = None
    if kpi_log_path is not None:
        log_fh = open(kpi_log_path, "w", encoding="utf-8", newline="")
        log_writer = csv.writer(log_fh)
        log_writer.writerow(KPI_LOG_HEADER)
    try:
        for tti in range(horizon):
            if tti % t_slice == 0:
                stats = world.slice_stats()
                if tti > 0:
                    rewards.append(total_reward(stats, reward_cfg).total)
                world.set_split(policy.decide(world, stats))
                decisions += 1
            world.step()
            if tti >= warmup:
                ok = world.pair_satisfaction()
                sat_counts += ok
                sat_all += int(ok.all())
                counted += 1
            if log_writer is not None:
                _write_kpi_rows(log_writer, world, tti)
        rewards.append(total_reward(world.slice_stats(), reward_cfg).total)
    finally:
        if log_fh is not None:
            log_fh.close()

    per_pair = sat_counts / max(counted, 1)
    return TrialResult(
        sr=float(per_pair.mean()),
        sr_all_pairs=sat_all / max(counted, 1),
        per_pair_sr=per_pair,
        mean_reward=float(np.mean(rewards)),
        decisions=decisions,
        horizon=horizon,
        warmup=warmup,
    )


def _write_kpi_rows(writer, world: World, tti: int) -> None:
    kpis = world.snapshot()
    link_ok = check_satisfaction(kpis, world.specs)
    se_row = world.last_se_row()
    latency = kpis.latency_ms
    loss = kpis.loss
    rate = kpis.rate_bps
    for link in range(world.num_links):
        writer.writerow([
            tti,
            SLICE_NAMES[int(kpis.slice_of_link[link])],
            link,
            repr(float(latency[link])),
            repr(float(loss[link])),
            repr(float(rate[link])),
            int(kpis.occupancy_bits[link]),
            repr(float(se_row[link])),
            int(link_ok[link]),
        ])


def recount_sr_from_kpi_log(path: str, pairs: int, warmup: int) -> float:
    """Independent satisfaction-rate recount from a persisted KPI log."""
    sat = np.zeros(pairs, dtype=np.int64)
    counted = 0
    by_tti: dict[int, np.ndarray] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            tti = int(row["tti"])
            if tti < warmup:
                continue
            ok = by_tti.setdefault(tti, np.zeros(3 * pairs, dtype=bool))
            ok[int(row["user"])] = bool(int(row["satisfied"]))
    for tti in sorted(by_tti):
        link_ok = by_tti[tti]
        sat += pair_satisfaction(link_ok, pairs)
        counted += 1
    return float((sat / max(counted, 1)).mean())


# -- training ----------------------------------------------------------


def train_agent(cfg: RunConfig, seed, log_path: str | None = None,
                agent: SacAgent | None = None) -> SacAgent:
    """Train a SAC agent for ``cfg.trial.training_ttis`` environment TTIs.

    Worlds of ``trial_ttis`` are chained with fresh child seeds; the pending
    transition is dropped at world boundaries so no transition spans two
    worlds.  One decision is taken every ``t_slice_ms`` TTIs and the reward
    of a decision is computed from the KPI snapshot at the end of its
    interval, which is also the next decision's observation.  When the SAC
    config sets ``target_entropy_final``, the entropy target is annealed
    linearly over the first ``entropy_anneal_frac`` of planned decisions.
    """
    if agent is None:
        agent = SacAgent(cfg.sac, OBS_DIM, cfg.ran.num_rbs,
                         cfg.trial.min_slice_rbs, seed=(seed, 0))
    reward_cfg = cfg.reward()
    t_slice = cfg.trial.t_slice_ms
    remaining = cfg.trial.training_ttis
    world_idx = 0
    step_idx = 0

    anneal_to = cfg.sac.target_entropy_final
    if anneal_to is not None:
        anneal_from = cfg.sac.target_entropy
        planned = max(1, cfg.trial.training_ttis // t_slice)
        anneal_end = max(1, int(cfg.sac.entropy_anneal_frac * planned))

    log_fh = None
    writer = None
    if log_path is not None:
        log_fh = open(log_path, "w", encoding="utf-8", newline="")
        writer = csv.writer(log_fh)
        writer.writerow(TRAINING_LOG_HEADER)
    try:
        while remaining > 0:
            world = build_world(cfg, (seed, 1, world_idx))
            world_idx += 1
            prev_obs = None
            prev_raw = 0.0
            span = min(remaining, world.horizon)
            for tti in range(span):
                if tti % t_slice == 0:
                    if anneal_to is not None:
                        frac = min(1.0, step_idx / anneal_end)
                        agent.set_target_entropy(
                            anneal_from + (anneal_to - anneal_from) * frac)
                    stats = world.slice_stats()
                    obs = world.observation(stats)
                    if prev_obs is not None:
                        reward = total_reward(stats, reward_cfg).total
                        stored = reward
                        if cfg.sac.reward_floor is not None:
                            # loss penalties can reach the thousands when a
                            # slice starves; flooring what the critics see
                            # keeps value targets on the scale of the
                            # informative reward range
                            stored = max(stored, cfg.sac.reward_floor)
                        agent.store(prev_obs, prev_raw, stored, obs, False)
                        report = None
                        if agent.ready_to_update():
                            for _ in range(cfg.sac.updates_per_decision):
                                report = agent.update()
                        if writer is not None:
                            _write_training_row(writer, step_idx, reward,
                                                report, agent)
                        step_idx += 1
                    action = agent.act(obs, deterministic=False)
                    world.set_split(action.haptic_rbs)
                    prev_obs, prev_raw = obs, action.raw
                world.step()
            remaining -= span
    finally:
        if log_fh is not None:
            log_fh.close()
    return agent


def _write_training_row(writer, step: int, reward: float, report, agent) -> None:
    if report is None:
        writer.writerow([step, repr(float(reward)), "", "", "",
                         repr(agent.entropy_coeff)])
    else:
        writer.writerow([
            step,
            repr(float(reward)),
            repr(report.critic1_loss),
            repr(report.critic2_loss),
            repr(report.actor_loss),
            repr(report.entropy_coeff),
        ])


def evaluate_agent(cfg: RunConfig, agent: SacAgent,
                   seeds=None) -> list[TrialResult]:
    """Deterministic-policy trials on held-out seeds."""
    if seeds is None:
        seeds = cfg.trial.eval_seeds
    policy = AgentPolicy(agent, deterministic=True)
    return [run_trial(cfg, policy, (s, 2)) for s in seeds]


# -- sweeps ------------------------------------------------------------


def apply_sweep_param(cfg: RunConfig, sweep: str, value) -> RunConfig:
    param, _ = SWEEPS[sweep]
    if param == "pairs":
        return cfg.replace_trial(pairs=int(value))
    if param == "t_slice_ms":
        return cfg.replace_trial(t_slice_ms=int(value))
    if param == "mean_se":
        return cfg.replace(channel=dataclasses.replace(cfg.channel,
                                                       mean_se=float(value)))
    if param == "fluctuation":
        return cfg.replace(channel=dataclasses.replace(cfg.channel,
                                                       fluctuation=float(value)))
    raise ConfigError(f"unknown sweep parameter {param}")


def run_sweep_task(cfg_dict: dict, sweep: str, value, variant: str,
                   seed: int) -> dict:
    """Train and evaluate one sweep cell; returns a results row."""
    cfg = run_config_from_dict(cfg_dict)
    cfg = apply_sweep_param(cfg, sweep, value)
    cfg = cfg.replace_trial(variant=variant, seed=seed)
    agent = train_agent(cfg, seed)
    results = evaluate_agent(cfg, agent)
    return {
        "sweep": sweep,
        "param_value": value,
        "variant": variant,
        "t_slice_ms": cfg.trial.t_slice_ms,
        "seed": seed,
        "sr": float(np.mean([r.sr for r in results])),
        "mean_reward": float(np.mean([r.mean_reward for r in results])),
    }


def run_sweep(name: str, base: RunConfig, seeds=None, variants=VARIANTS,
              jobs: int = 1) -> list[dict]:
    """All (point, variant, seed) cells of one named sweep, in stable order."""
    if name not in SWEEPS:
        raise ConfigError(f"unknown sweep {name!r}; choose from "
                          f"{sorted(SWEEPS)}")
    if seeds is None:
        seeds = (base.trial.seed, base.trial.seed + 1, base.trial.seed + 2)
    _, values = SWEEPS[name]
    tasks = [
        (base.to_dict(), name, value, variant, int(seed))
        for value in values
        for variant in variants
        for seed in seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_sweep_task_star, tasks))
    else:
        rows = [run_sweep_task(*t) for t in tasks]
    return rows


def _run_sweep_task_star(args):
    return run_sweep_task(*args)


INTERVAL_CHOICES = (1, 10, 50)


def run_interval_study(base: RunConfig, seeds=None, jobs: int = 1,
                       sweeps=("users", "se", "fluctuation"),
                       intervals=INTERVAL_CHOICES) -> list[dict]:
    """The parameter sweeps repeated per slicing interval.

    Only the video-haptic variant is trained; each row carries its
    ``t_slice_ms`` so a sweep point groups into one row per interval.  The
    1 ms group reproduces the plain sweep exactly under identical seeds.
    """
    rows = []
    for t in intervals:
        cfg = base.replace_trial(t_slice_ms=int(t))
        for name in sweeps:
            rows.extend(run_sweep(name, cfg, seeds=seeds,
                                  variants=(VARIANTS[0],), jobs=jobs))
    return rows


# -- CSV and manifest I/O ----------------------------------------------


def write_results_csv(path: str, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            writer.writerow([
                row["sweep"],
                row["param_value"],
                row["variant"],
                row["t_slice_ms"],
                row["seed"],
                repr(float(row["sr"])),
                repr(float(row["mean_reward"])),
            ])


def read_results_csv(path: str) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "sweep": row["sweep"],
                "param_value": float(row["param_value"]),
                "variant": row["variant"],
                "t_slice_ms": int(row["t_slice_ms"]),
                "seed": int(row["seed"]),
                "sr": float(row["sr"]),
                "mean_reward": float(row["mean_reward"]),
            })
    return rows


def write_manifest(path: str, cfg: RunConfig, command: str,
                   extra: dict | None = None) -> None:
    """Record everything needed to regenerate a run's outputs exactly."""
    doc = {
        "artifact_version": __version__,
        "numba": NUMBA_ENABLED,
        "command": command,
        "config": cfg.to_dict(),
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path: str) -> tuple[RunConfig, dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"manifest not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if "config" not in doc:
        raise ConfigError(f"{path}: manifest has no config section")
    cfg = run_config_from_dict(doc["config"])
    return cfg, doc


def run_sweep_to_dir(name: str, base: RunConfig, out_dir: str, seeds=None,
                     variants=VARIANTS, jobs: int = 1) -> str:
    """Run a sweep and persist results + manifest; returns the CSV path."""
    os.makedirs(out_dir, exist_ok=True)
    seeds = tuple(seeds) if seeds is not None else (
        base.trial.seed, base.trial.seed + 1, base.trial.seed + 2)
    rows = run_sweep(name, base, seeds=seeds, variants=variants, jobs=jobs)
    csv_path = os.path.join(out_dir, "results.csv")
    write_results_csv(csv_path, rows)
    write_manifest(os.path.join(out_dir, "manifest.json"), base, "sweep",
                   {"sweep": name, "seeds": list(seeds),
                    "variants": list(variants)})
    return csv_path
