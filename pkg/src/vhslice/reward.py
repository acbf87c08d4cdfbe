"""Piecewise-linear reward over windowed slice KPIs.

Every component is zero while its requirement holds and decreases linearly
with the violation, so the total is never positive and vanishes exactly when
all conditions are met.  Components per slice: rate shortfall, loss overage,
and a latency term that depends on the variant (see
:class:`vhslice.config.RewardConfig`).
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import (
    HAPTIC,
    VIDEO,
    VARIANT_VIDEO_HAPTIC,
    RewardConfig,
)


@dataclass(frozen=True)
class RewardBreakdown:
    """Per-component values (all <= 0) and their sum."""

    rate_haptic: float
    rate_video: float
    loss_haptic: float
    loss_video: float
    latency_haptic: float
    latency_video: float
    total: float


def rate_reward(rate_bps: float, rate_req_bps: float) -> float:
    """0 at or above the requirement, else the relative shortfall."""
    if rate_req_bps <= 0:
        raise ValueError("rate_req_bps must be > 0")
    if rate_bps >= rate_req_bps:
        return 0.0
    return -(rate_req_bps - rate_bps) / rate_req_bps


def loss_reward(loss: float, loss_req: float, loss_scale: float) -> float:
    """0 at or below the requirement, else the scaled overage."""
    if loss_req < 0:
        raise ValueError("loss_req must be >= 0")
    if loss_scale <= 0:
        raise ValueError("loss_scale must be > 0")
    if loss <= loss_req:
        return 0.0
    return -(loss - loss_req) / (loss_scale * loss_req)


def video_latency_reward(video_latency_ms: float, haptic_latency_ms: float,
                         sync_tolerance_ms: float) -> float:
    """Penalise the video/haptic latency gap beyond the sync tolerance."""
    if sync_tolerance_ms <= 0:
        raise ValueError("sync_tolerance_ms must be > 0")
    gap = abs(video_latency_ms - haptic_latency_ms)
    if gap <= sync_tolerance_ms:
        return 0.0
    return -(gap - sync_tolerance_ms) / sync_tolerance_ms


def haptic_latency_reward(latency_ms: float, latency_req_ms: float,
                          max_delay_ms: float) -> float:
    """Penalise latency above the requirement, scaled by the buffer deadline.

    The video-haptic variant feeds the worst-channel user's head-of-line
    wait; the baseline variant feeds slice-average latency.
    """
    if latency_req_ms <= 0:
        raise ValueError("latency_req_ms must be > 0")
    if max_delay_ms <= 0:
        raise ValueError("max_delay_ms must be > 0")
    if latency_ms <= latency_req_ms:
        return 0.0
    return -(latency_ms - latency_req_ms) / max_delay_ms


def slice_latency_reward(latency_ms: float, latency_req_ms: float) -> float:
    """Requirement-normalised latency deficit, the conventional per-SLA form.

    Used by the baseline variant for both slices; the tight (1 ms)
    low-latency target makes this term dominate whenever that slice is not
    served every TTI, which is the behaviour the video-haptic variant's
    tolerance-aware terms are designed to avoid.
    """
    if latency_req_ms <= 0:
        raise ValueError("latency_req_ms must be > 0")
    if latency_ms <= latency_req_ms:
        return 0.0
    return -(latency_ms - latency_req_ms) / latency_req_ms


def total_reward(kpis, cfg: RewardConfig) -> RewardBreakdown:
    """Assemble the six components from a slice-KPI snapshot.

    ``kpis`` needs per-slice ``rate_bps``, ``loss`` and ``latency_ms``
    sequences (haptic first) plus ``worst_user_latency_ms`` for the
    video-haptic haptic-latency term.
    """
    r_h = rate_reward(kpis.rate_bps[HAPTIC], cfg.rate_req_bps[HAPTIC])
    r_v = rate_reward(kpis.rate_bps[VIDEO], cfg.rate_req_bps[VIDEO])
    l_h = loss_reward(kpis.loss[HAPTIC], cfg.loss_req[HAPTIC], cfg.loss_scale)
    l_v = loss_reward(kpis.loss[VIDEO], cfg.loss_req[VIDEO], cfg.loss_scale)
    if cfg.variant == VARIANT_VIDEO_HAPTIC:
        lat_h = haptic_latency_reward(
            kpis.worst_user_latency_ms,
            cfg.latency_req_ms[HAPTIC],
            cfg.max_delay_ms[HAPTIC],
        )
        lat_v = video_latency_reward(
            kpis.latency_ms[VIDEO],
            kpis.latency_ms[HAPTIC],
            cfg.sync_tolerance_ms,
        )
    else:
        # conventional per-SLA reward: slice-average latency against each
        # slice's own target, normalised by that target
        lat_h = slice_latency_reward(kpis.latency_ms[HAPTIC],
                                     cfg.latency_req_ms[HAPTIC])
        lat_v = slice_latency_reward(kpis.latency_ms[VIDEO],
                                     cfg.latency_req_ms[VIDEO])
    total = r_h + r_v + l_h + l_v + lat_h + lat_v
    return RewardBreakdown(
        rate_haptic=r_h,
        rate_video=r_v,
        loss_haptic=l_h,
        loss_video=l_v,
        latency_haptic=lat_h,
        latency_video=lat_v,
        total=total,
    )
