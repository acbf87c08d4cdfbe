"""Configuration types for the slicing simulator, reward, and agent.

Everything a run needs is collected in :class:`RunConfig`, which nests the
per-subsystem dataclasses and (de)serialises to a flat JSON document.  A run
manifest is such a document plus the package version, so a finished run can
be reproduced byte-for-byte from its manifest alone.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any

# Slice indices used by all array code: haptic first, video second.
HAPTIC = 0
VIDEO = 1
SLICE_NAMES = ("haptic", "video")


class ConfigError(ValueError):
    """A configuration value is out of range or inconsistent."""


@dataclass(frozen=True)
class SliceSpec:
    """Service requirements for one slice, checked per user over a KPI window.

    ``max_buffer_delay_ms`` is the head-of-line deadline after which queued
    packets are discarded; it bounds every delivered latency.
    """

    name: str
    latency_req_ms: float
    loss_req: float
    rate_req_bps: float
    max_buffer_delay_ms: float

    def __post_init__(self) -> None:
        if self.latency_req_ms <= 0:
            raise ConfigError(f"{self.name}: latency_req_ms must be > 0")
        if not 0.0 <= self.loss_req <= 1.0:
            raise ConfigError(f"{self.name}: loss_req must be in [0, 1]")
        if self.rate_req_bps <= 0:
            raise ConfigError(f"{self.name}: rate_req_bps must be > 0")
        if self.max_buffer_delay_ms < self.latency_req_ms:
            raise ConfigError(
                f"{self.name}: max_buffer_delay_ms must be >= latency_req_ms"
            )


def haptic_slice_spec() -> SliceSpec:
    return SliceSpec("haptic", latency_req_ms=10.0, loss_req=1e-5,
                     rate_req_bps=0.2e6, max_buffer_delay_ms=20.0)


def video_slice_spec() -> SliceSpec:
    return SliceSpec("video", latency_req_ms=50.0, loss_req=0.1,
                     rate_req_bps=4e6, max_buffer_delay_ms=100.0)


@dataclass(frozen=True)
class RanConfig:
    """Physical-layer constants: 20 MHz split into 100 resource blocks, 1 ms TTIs."""

    bandwidth_hz: float = 20e6
    num_rbs: int = 100
    tti_ms: float = 1.0
    kpi_window_ttis: int = 200

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be > 0")
        if self.num_rbs < 2:
            raise ConfigError("num_rbs must be >= 2 (one per slice)")
        if self.tti_ms <= 0:
            raise ConfigError("tti_ms must be > 0")
        if self.kpi_window_ttis < 1:
            raise ConfigError("kpi_window_ttis must be >= 1")

    @property
    def rb_hz(self) -> float:
        return self.bandwidth_hz / self.num_rbs

    @property
    def rb_bits_per_se(self) -> float:
        """Bits one RB carries in one TTI per unit spectral efficiency."""
        return self.rb_hz * self.tti_ms * 1e-3


@dataclass(frozen=True)
class TrafficConfig:
    """Source models: 64-bit haptic samples at 1 kHz, ~4 Mbps 30 fps video."""

    haptic_packet_bits: int = 64
    haptic_period_ms: float = 1.0
    video_packet_bits: int = 133336
    video_period_ms: float = 100.0 / 3.0
    video_jitter_ms: float = 4.0
    pd_reduction: float = 0.0
    haptic_trace: str | None = None

    def __post_init__(self) -> None:
        if self.haptic_packet_bits <= 0 or self.video_packet_bits <= 0:
            raise ConfigError("packet sizes must be > 0")
        if self.haptic_period_ms <= 0 or self.video_period_ms <= 0:
            raise ConfigError("source periods must be > 0")
        if self.video_jitter_ms < 0:
            raise ConfigError("video_jitter_ms must be >= 0")
        if not 0.0 <= self.pd_reduction <= 1.0:
            raise ConfigError("pd_reduction must be in [0, 1]")


@dataclass(frozen=True)
class ChannelConfig:
    """Synthetic spectral-efficiency model.

    Per-link SE is ``mean_se * (1 + fluctuation * x)`` where ``x`` follows a
    clipped AR(1) in [-1, 1], so samples stay inside the envelope
    ``mean_se * (1 ± fluctuation)``.  ``latent_std`` is the stationary
    standard deviation of the latent process before clipping.
    """

    mean_se: float = 5.0
    fluctuation: float = 0.25
    correlation_ms: float = 50.0
    latent_std: float = 0.5
    se_trace: str | None = None

    def __post_init__(self) -> None:
        if self.mean_se <= 0:
            raise ConfigError("mean_se must be > 0")
        if not 0.0 <= self.fluctuation < 1.0:
            raise ConfigError("fluctuation must be in [0, 1)")
        if self.correlation_ms <= 0:
            raise ConfigError("correlation_ms must be > 0")
        if not 0.0 < self.latent_std <= 1.0:
            raise ConfigError("latent_std must be in (0, 1]")


VARIANT_VIDEO_HAPTIC = "video_haptic"
VARIANT_BASELINE = "baseline"
VARIANTS = (VARIANT_VIDEO_HAPTIC, VARIANT_BASELINE)


@dataclass(frozen=True)
class RewardConfig:
    """Thresholds and scales for the piecewise-linear reward.

    ``variant`` selects the latency components: ``video_haptic`` penalises the
    worst-channel haptic user's head-of-line wait and the video/haptic latency
    gap, while ``baseline`` penalises slice-average latency against fixed
    per-slice targets and has no synchronisation term.  Rate and loss
    components share one functional form across variants.
    """

    variant: str = VARIANT_VIDEO_HAPTIC
    rate_req_bps: tuple[float, float] = (0.2e6, 4e6)
    loss_req: tuple[float, float] = (1e-5, 0.1)
    latency_req_ms: tuple[float, float] = (10.0, 50.0)
    max_delay_ms: tuple[float, float] = (20.0, 100.0)
    sync_tolerance_ms: float = 50.0
    loss_scale: float = 10.0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        for pair_name in ("rate_req_bps", "loss_req", "latency_req_ms",
                          "max_delay_ms"):
            pair = getattr(self, pair_name)
            if len(pair) != 2 or any(v < 0 for v in pair):
                raise ConfigError(f"{pair_name} must be two values >= 0")
        if self.sync_tolerance_ms <= 0:
            raise ConfigError("sync_tolerance_ms must be > 0")
        if self.loss_scale <= 0:
            raise ConfigError("loss_scale must be > 0")


def video_haptic_reward_config() -> RewardConfig:
    return RewardConfig(variant=VARIANT_VIDEO_HAPTIC)


def baseline_reward_config() -> RewardConfig:
    """Conventional per-slice reward: rate and loss for both slices plus a
    requirement-normalised slice-average latency deficit per slice, with a
    1 ms target for the low-latency slice."""
    return RewardConfig(variant=VARIANT_BASELINE, latency_req_ms=(1.0, 50.0))


def reward_config_for(variant: str) -> RewardConfig:
    if variant == VARIANT_VIDEO_HAPTIC:
        return video_haptic_reward_config()
    if variant == VARIANT_BASELINE:
        return baseline_reward_config()
    raise ConfigError(f"variant must be one of {VARIANTS}")


@dataclass(frozen=True)
class SacConfig:
    """Soft actor-critic hyperparameters.

    Defaults are the full-size training profile (three hidden layers of
    512/512/256, batch 1024, replay capacity 1e6).  ``entropy_coeff`` is
    auto-tuned against ``target_entropy`` when None, otherwise held fixed.
    When ``target_entropy_final`` is set, the training loop interpolates the
    target linearly from ``target_entropy`` down to it over the first
    ``entropy_anneal_frac`` of planned decisions: wide early exploration,
    then a de-dithered finish.
    """

    hidden: tuple[int, ...] = (512, 512, 256)
    learning_rate: float = 1e-4
    gamma: float = 0.99
    batch_size: int = 1024
    buffer_capacity: int = 1_000_000
    polyak: float = 0.005
    entropy_coeff: float | None = None
    target_entropy: float = -1.0
    target_entropy_final: float | None = None
    entropy_anneal_frac: float = 0.6
    init_log_entropy_coeff: float = 0.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    log_std_min: float = -20.0
    log_std_max: float = 2.0
    update_start: int | None = None
    updates_per_decision: int = 1
    reward_floor: float | None = None

    def __post_init__(self) -> None:
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ConfigError("hidden must be a non-empty tuple of sizes >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma must be in [0, 1]")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.buffer_capacity < self.batch_size:
            raise ConfigError("buffer_capacity must be >= batch_size")
        if not 0.0 <= self.polyak <= 1.0:
            raise ConfigError("polyak must be in [0, 1]")
        if self.entropy_coeff is not None and self.entropy_coeff < 0:
            raise ConfigError("entropy_coeff must be >= 0 when fixed")
        if self.target_entropy_final is not None and self.entropy_coeff is not None:
            raise ConfigError(
                "target_entropy_final requires auto-tuned entropy_coeff")
        if not 0.0 < self.entropy_anneal_frac <= 1.0:
            raise ConfigError("entropy_anneal_frac must be in (0, 1]")
        if self.updates_per_decision < 0:
            raise ConfigError("updates_per_decision must be >= 0")
        if self.reward_floor is not None and self.reward_floor >= 0:
            raise ConfigError("reward_floor must be negative when set")


@dataclass(frozen=True)
class TrialConfig:
    """One simulated deployment: U teleoperation pairs sharing the cell.

    Each pair contributes an operator haptic flow, a teleoperator haptic flow
    and a teleoperator video flow (3U links, 2U of them haptic).  A trial
    lasts ``trial_ttis`` TTIs; the agent re-splits the band every
    ``t_slice_ms`` TTIs; satisfaction is counted after ``warmup_ttis``.
    """

    pairs: int = 20
    t_slice_ms: int = 10
    trial_ttis: int = 10_000
    variant: str = VARIANT_VIDEO_HAPTIC
    seed: int = 1
    min_slice_rbs: int = 1
    intra_scheduler: str = "proportional"
    training_ttis: int = 200_000
    eval_seeds: tuple[int, ...] = (101, 102, 103)
    warmup_ttis: int | None = None
    ring_capacity: int = 64

    def __post_init__(self) -> None:
        if self.pairs < 1:
            raise ConfigError("pairs must be >= 1")
        if self.t_slice_ms < 1:
            raise ConfigError("t_slice_ms must be >= 1")
        if self.trial_ttis < 1:
            raise ConfigError("trial_ttis must be >= 1")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if self.min_slice_rbs < 1:
            raise ConfigError("min_slice_rbs must be >= 1")
        if self.intra_scheduler not in ("proportional", "round_robin"):
            raise ConfigError("intra_scheduler must be proportional|round_robin")
        if self.training_ttis < 0:
            raise ConfigError("training_ttis must be >= 0")
        if self.warmup_ttis is not None and self.warmup_ttis < 0:
            raise ConfigError("warmup_ttis must be >= 0")
        if self.ring_capacity < 4:
            raise ConfigError("ring_capacity must be >= 4")


@dataclass(frozen=True)
class RunConfig:
    """Top-level bundle serialised into run manifests."""

    trial: TrialConfig = field(default_factory=TrialConfig)
    ran: RanConfig = field(default_factory=RanConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    sac: SacConfig = field(default_factory=SacConfig)

    @property
    def warmup_ttis(self) -> int:
        if self.trial.warmup_ttis is not None:
            return self.trial.warmup_ttis
        return self.ran.kpi_window_ttis

    def reward(self) -> RewardConfig:
        return reward_config_for(self.trial.variant)

    def replace(self, **kwargs: Any) -> "RunConfig":
        return dataclasses.replace(self, **kwargs)

    def replace_trial(self, **kwargs: Any) -> "RunConfig":
        return dataclasses.replace(self, trial=dataclasses.replace(self.trial, **kwargs))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_SECTIONS = {
    "trial": TrialConfig,
    "ran": RanConfig,
    "traffic": TrafficConfig,
    "channel": ChannelConfig,
    "sac": SacConfig,
}

# JSON deserialises tuples as lists; these fields must be converted back.
_TUPLE_FIELDS = {
    "hidden": int,
    "eval_seeds": int,
    "rate_req_bps": float,
    "loss_req": float,
    "latency_req_ms": float,
    "max_delay_ms": float,
}


def _build_section(cls, data: dict, path: str):
    valid = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in valid:
            raise ConfigError(f"{path}.{key}: unknown field")
        if key in _TUPLE_FIELDS and isinstance(value, list):
            value = tuple(_TUPLE_FIELDS[key](v) for v in value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def run_config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    sections = {}
    for key, value in data.items():
        if key not in _SECTIONS:
            raise ConfigError(f"{key}: unknown config section")
        if not isinstance(value, dict):
            raise ConfigError(f"{key}: section must be a JSON object")
        sections[key] = _build_section(_SECTIONS[key], value, key)
    return RunConfig(**sections)


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return run_config_from_dict(data)
