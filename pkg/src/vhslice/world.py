"""A steppable cell serving U teleoperation pairs.

Link layout (fixed): operator haptic flows ``0..U-1``, teleoperator haptic
flows ``U..2U-1``, teleoperator video flows ``2U..3U-1``.  Each link has its
own traffic source and channel stream.  The world advances one TTI at a
time under the currently set inter-slice split; observations, slice KPI
snapshots, and per-pair satisfaction are derived from the RAN window state.
"""

from __future__ import annotations

import numpy as np

from . import ran, traffic
from .channel import ChannelModel, TraceChannel, load_se_trace
from .config import (
    HAPTIC,
    VIDEO,
    ConfigError,
    RunConfig,
    haptic_slice_spec,
    video_slice_spec,
)

# Observation layout: per slice [mean SE, mean occupancy, latency, loss,
# rate], haptic block first, each scaled into [0, 1].
OBS_DIM = 10
SE_SCALE = 10.0


class World:
    """One seeded deployment of ``cfg.trial.pairs`` teleoperation pairs."""

    def __init__(self, cfg: RunConfig, seed):
        if cfg.trial.pairs < 1:
            raise ConfigError("pairs must be >= 1")
        self.cfg = cfg
        self.seed = seed
        u = cfg.trial.pairs
        self.pairs = u
        self.num_links = 3 * u
        self.specs = (haptic_slice_spec(), video_slice_spec())
        self.slice_of_link = np.array([HAPTIC] * 2 * u + [VIDEO] * u,
                                      dtype=np.int64)
        self.horizon = cfg.trial.trial_ttis

        seeds = np.random.SeedSequence(seed).spawn(2)
        self._build_traffic(seeds[0])
        self._build_channel(seeds[1])

        self.ran = ran.RanState(self.slice_of_link, cfg.ran, self.specs,
                                ring_capacity=cfg.trial.ring_capacity)
        half = cfg.ran.num_rbs // 2
        self._split = np.array([half, cfg.ran.num_rbs - half], dtype=np.int64)
        self.tti = 0

        # Observation scales; occupancy normalises by a full buffer's worth
        # of packets at the slice deadline.
        tr = cfg.traffic
        haptic_cap = tr.haptic_packet_bits * (
            self.specs[HAPTIC].max_buffer_delay_ms / tr.haptic_period_ms + 2)
        video_cap = tr.video_packet_bits * (
            self.specs[VIDEO].max_buffer_delay_ms / tr.video_period_ms + 2)
        self._occ_scale = np.array([haptic_cap, video_cap])
        self._rate_scale = 2.0 * np.array([self.specs[HAPTIC].rate_req_bps,
                                           self.specs[VIDEO].rate_req_bps])
        self._delay_scale = np.array([self.specs[HAPTIC].max_buffer_delay_ms,
                                      self.specs[VIDEO].max_buffer_delay_ms])

    def _build_traffic(self, seed_seq) -> None:
        cfg = self.cfg
        u = self.pairs
        child_seeds = seed_seq.spawn(self.num_links)
        trace = None
        if cfg.traffic.haptic_trace is not None:
            trace = traffic.load_haptic_trace(cfg.traffic.haptic_trace)
        sources = []
        for link in range(self.num_links):
            rng = np.random.default_rng(child_seeds[link])
            if link < 2 * u:
                if trace is not None:
                    offset = float(rng.uniform(0.0, max(trace.duration_ms, 1.0)))
                    sources.append(traffic.trace_source(link, trace,
                                                        self.horizon, offset))
                else:
                    sources.append(traffic.haptic_source(link, cfg.traffic,
                                                         self.horizon, rng))
            else:
                sources.append(traffic.video_source(link, cfg.traffic,
                                                    self.horizon, rng))
        self.sources = sources
        self._arr_offsets, self._arr_links, self._arr_bits = (
            traffic.build_arrival_table(sources, self.horizon))

    def _build_channel(self, seed_seq) -> None:
        cfg = self.cfg
        if cfg.channel.se_trace is not None:
            matrix = load_se_trace(cfg.channel.se_trace)
            if matrix.shape[1] != self.num_links:
                raise ConfigError(
                    f"SE trace has {matrix.shape[1]} links, world needs "
                    f"{self.num_links}")
            if matrix.shape[0] < self.horizon:
                raise ConfigError(
                    f"SE trace covers {matrix.shape[0]} TTIs, trial needs "
                    f"{self.horizon}")
            self.channel = TraceChannel(matrix)
        else:
            self.channel = ChannelModel(cfg.channel, self.num_links,
                                        np.random.default_rng(seed_seq))

    # -- stepping ------------------------------------------------------

    def set_split(self, haptic_rbs: int) -> None:
        """Install an inter-slice split; it persists until changed."""
        total = self.cfg.ran.num_rbs
        if not 0 <= haptic_rbs <= total:
            raise ValueError(f"haptic_rbs must be within [0, {total}]")
        self._split = np.array([haptic_rbs, total - haptic_rbs], dtype=np.int64)

    def set_raw_split(self, haptic_rbs: int, video_rbs: int) -> None:
        """Install an arbitrary (possibly partial) split, for sanity runs."""
        if haptic_rbs < 0 or video_rbs < 0:
            raise ValueError("slice RBs must be >= 0")
        if haptic_rbs + video_rbs > self.cfg.ran.num_rbs:
            raise ValueError("split exceeds the available RBs")
        self._split = np.array([haptic_rbs, video_rbs], dtype=np.int64)

    @property
    def split(self) -> tuple[int, int]:
        return int(self._split[0]), int(self._split[1])

    def se_row(self) -> np.ndarray:
        return self.channel.se_row(self.tti)

    def step(self) -> ran.StepOutputs:
        """Advance one TTI under the installed split."""
        if self.tti >= self.horizon:
            raise RuntimeError("world stepped past its horizon")
        t = self.tti
        lo, hi = self._arr_offsets[t], self._arr_offsets[t + 1]
        out = self.ran.step(
            t,
            self._arr_links[lo:hi],
            self._arr_bits[lo:hi],
            self.channel.se_row(t),
            self._split,
            intra=self.cfg.trial.intra_scheduler,
        )
        self.tti += 1
        return out

    # -- derived state ---------------------------------------------------

    def last_se_row(self) -> np.ndarray:
        """SE of the most recently completed TTI (row 0 before any step)."""
        return self.channel.se_row(max(self.tti - 1, 0))

    def snapshot(self) -> ran.LinkKpis:
        return self.ran.snapshot()

    def slice_stats(self) -> ran.SliceKpis:
        return ran.slice_stats(self.snapshot(), self.last_se_row())

    def pair_satisfaction(self) -> np.ndarray:
        link_ok = ran.check_satisfaction(self.snapshot(), self.specs)
        return ran.pair_satisfaction(link_ok, self.pairs)

    def observation(self, stats: ran.SliceKpis | None = None) -> np.ndarray:
        """Normalised per-slice KPI vector (haptic block, then video)."""
        if stats is None:
            stats = self.slice_stats()
        obs = np.empty(OBS_DIM)
        for sl in (HAPTIC, VIDEO):
            base = 5 * sl
            obs[base + 0] = stats.mean_se[sl] / SE_SCALE
            obs[base + 1] = stats.mean_occupancy_bits[sl] / self._occ_scale[sl]
            obs[base + 2] = stats.latency_ms[sl] / self._delay_scale[sl]
            obs[base + 3] = stats.loss[sl]
            obs[base + 4] = stats.rate_bps[sl] / self._rate_scale[sl]
        return np.clip(obs, 0.0, 1.0)
