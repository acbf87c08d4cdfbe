"""Link-layer state: FIFO buffers, deadline discards, windowed KPIs.

Bits are integers throughout, so per-TTI conservation is exact:
``arrived == sent + discarded_remaining + (occupancy_after - occupancy_before)``.
Delivered latency can never exceed the slice's buffer deadline because the
head-of-line wait is checked before transmission each TTI (a packet present
in slot ``t`` with arrival ``a`` has waited ``t - a + 1`` slots, the same
convention as delivered latency).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import HAPTIC, VIDEO, RanConfig, SliceSpec


@dataclass(frozen=True)
class StepOutputs:
    """Per-link accounting for one TTI (int64 arrays)."""

    sent_bits: np.ndarray
    delivered_count: np.ndarray
    discarded_count: np.ndarray
    arrived_bits: np.ndarray
    discarded_remaining_bits: np.ndarray
    allocated_rbs: np.ndarray


@dataclass(frozen=True)
class LinkKpis:
    """Sliding-window statistics per link, plus instantaneous buffer state.

    ``queued_full_bits`` holds the original sizes of still-queued packets
    (partial transmission does not reduce it); ``occupancy_bits`` holds bits
    remaining to send.  ``window_ms`` is the window length in milliseconds.
    """

    window_ms: float
    slice_of_link: np.ndarray
    arrived_bits: np.ndarray
    delivered_bits: np.ndarray
    delivered_count: np.ndarray
    latency_sum_ms: np.ndarray
    discarded_count: np.ndarray
    discarded_bits: np.ndarray
    queued_full_bits: np.ndarray
    occupancy_bits: np.ndarray
    hol_wait_ms: np.ndarray

    @property
    def latency_ms(self) -> np.ndarray:
        """Mean delivered latency per link; 0 for links with no deliveries."""
        cnt = np.maximum(self.delivered_count, 1)
        out = self.latency_sum_ms / cnt
        return np.where(self.delivered_count > 0, out, 0.0)

    @property
    def loss(self) -> np.ndarray:
        """Discarded fraction of concluded packets; 0 when none concluded."""
        concluded = self.delivered_count + self.discarded_count
        out = self.discarded_count / np.maximum(concluded, 1)
        return np.where(concluded > 0, out, 0.0)

    @property
    def rate_bps(self) -> np.ndarray:
        return self.delivered_bits / (self.window_ms * 1e-3)


@dataclass(frozen=True)
class SliceKpis:
    """Slice-level aggregates consumed by the reward and the observation."""

    mean_se: np.ndarray
    mean_occupancy_bits: np.ndarray
    latency_ms: np.ndarray
    loss: np.ndarray
    rate_bps: np.ndarray
    worst_user_latency_ms: float


class RanState:
    """All link buffers and window accounting for one cell."""

    def __init__(self, slice_of_link: np.ndarray, cfg: RanConfig,
                 specs: tuple[SliceSpec, SliceSpec], ring_capacity: int = 64):
        slice_of_link = np.asarray(slice_of_link, dtype=np.int64)
        if slice_of_link.ndim != 1 or slice_of_link.size == 0:
            raise ValueError("slice_of_link must be a non-empty 1-D array")
        if not np.isin(slice_of_link, (HAPTIC, VIDEO)).all():
            raise ValueError("slice_of_link entries must be HAPTIC or VIDEO")
        self.cfg = cfg
        self.specs = specs
        self.slice_of_link = slice_of_link
        n = slice_of_link.shape[0]
        self.num_links = n
        cap = int(ring_capacity)

        self._head = np.zeros(n, dtype=np.int64)
        self._count = np.zeros(n, dtype=np.int64)
        self._ring_arrival = np.zeros((n, cap), dtype=np.int64)
        self._ring_size = np.zeros((n, cap), dtype=np.int64)
        self._ring_remaining = np.zeros((n, cap), dtype=np.int64)
        self.occupancy_bits = np.zeros(n, dtype=np.int64)
        self.queued_full_bits = np.zeros(n, dtype=np.int64)

        members = [np.flatnonzero(slice_of_link == s) for s in (HAPTIC, VIDEO)]
        self._slice_links = np.concatenate(members).astype(np.int64)
        self._slice_offsets = np.array(
            [0, members[0].size, members[0].size + members[1].size],
            dtype=np.int64)
        self._max_delay = np.array(
            [int(specs[HAPTIC].max_buffer_delay_ms / cfg.tti_ms),
             int(specs[VIDEO].max_buffer_delay_ms / cfg.tti_ms)],
            dtype=np.int64)
        self._rr_offsets = np.zeros(2, dtype=np.int64)

        W = cfg.kpi_window_ttis
        self._window_slot = 0
        self._w = [np.zeros((n, W), dtype=np.int64) for _ in range(6)]
        self._s = [np.zeros(n, dtype=np.int64) for _ in range(6)]

        self._alloc = np.zeros(n, dtype=np.int64)
        self._out = [np.zeros(n, dtype=np.int64) for _ in range(5)]
        self.steps_done = 0

    def haptic_links(self) -> np.ndarray:
        lo, hi = self._slice_offsets[0], self._slice_offsets[1]
        return self._slice_links[lo:hi]

    def step(self, tti: int, arrival_link: np.ndarray, arrival_bits: np.ndarray,
             se_row: np.ndarray, slice_rbs, intra: str = "proportional") -> StepOutputs:
        """Advance one TTI under the given inter-slice RB split."""
        if tti != self.steps_done:
            raise ValueError(f"steps must be sequential (expected {self.steps_done})")
        slice_rbs = np.asarray(slice_rbs, dtype=np.int64)
        if slice_rbs.shape != (2,) or slice_rbs.min() < 0:
            raise ValueError("slice_rbs must be two non-negative counts")
        if int(slice_rbs.sum()) > self.cfg.num_rbs:
            raise ValueError(
                f"slice split {slice_rbs.tolist()} exceeds {self.cfg.num_rbs} RBs")
        se_row = np.asarray(se_row, dtype=np.float64)
        if se_row.shape != (self.num_links,):
            raise ValueError("se_row must have one entry per link")
        arrival_link = np.asarray(arrival_link, dtype=np.int64)
        arrival_bits = np.asarray(arrival_bits, dtype=np.int64)

        kernels.ran_step(
            np.int64(tti),
            self._head, self._count, self._ring_arrival, self._ring_size,
            self._ring_remaining, self.occupancy_bits, self.queued_full_bits,
            self.slice_of_link, self._slice_links, self._slice_offsets,
            self._max_delay,
            arrival_link, arrival_bits, se_row, slice_rbs,
            np.float64(self.cfg.rb_bits_per_se),
            intra == "round_robin", self._rr_offsets,
            np.int64(self._window_slot),
            *self._w, *self._s,
            *self._out, self._alloc,
        )
        self._window_slot = (self._window_slot + 1) % self.cfg.kpi_window_ttis
        self.steps_done += 1
        sent, delivered, discarded, arrived, disc_rem = self._out
        return StepOutputs(
            sent_bits=sent.copy(),
            delivered_count=delivered.copy(),
            discarded_count=discarded.copy(),
            arrived_bits=arrived.copy(),
            discarded_remaining_bits=disc_rem.copy(),
            allocated_rbs=self._alloc.copy(),
        )

    def hol_wait_ms(self) -> np.ndarray:
        """Current head-of-line wait per link (0 for empty buffers)."""
        tti = self.steps_done - 1
        wait = tti - self._ring_arrival[np.arange(self.num_links), self._head] + 1
        return np.where(self._count > 0, wait, 0).astype(np.float64) * self.cfg.tti_ms

    def snapshot(self) -> LinkKpis:
        s_arr, s_dbits, s_dcnt, s_lat, s_xcnt, s_xbits = self._s
        return LinkKpis(
            window_ms=self.cfg.kpi_window_ttis * self.cfg.tti_ms,
            slice_of_link=self.slice_of_link,
            arrived_bits=s_arr.copy(),
            delivered_bits=s_dbits.copy(),
            delivered_count=s_dcnt.copy(),
            latency_sum_ms=s_lat.copy(),
            discarded_count=s_xcnt.copy(),
            discarded_bits=s_xbits.copy(),
            queued_full_bits=self.queued_full_bits.copy(),
            occupancy_bits=self.occupancy_bits.copy(),
            hol_wait_ms=self.hol_wait_ms(),
        )


def check_satisfaction(kpis: LinkKpis, specs: tuple[SliceSpec, SliceSpec]) -> np.ndarray:
    """Per-link requirement check over the KPI window (inclusive thresholds).

    Latency and loss compare the windowed averages directly.  The rate
    clause compares served traffic against offered traffic: the requirement
    is met when delivered bits plus the original sizes of still-queued
    packets reach ``min(rate_req * window, arrived bits)``.  Capping at the
    offered load keeps sources that offer less than the nominal requirement
    (and window phases that contain one packet fewer) from being counted as
    network failures; the queued-bits credit is bounded because every queued
    packet either delivers or is discarded within the buffer deadline, at
    which point the loss and rate clauses both trip.
    """
    tau0 = np.array([specs[HAPTIC].latency_req_ms, specs[VIDEO].latency_req_ms])
    rho0 = np.array([specs[HAPTIC].loss_req, specs[VIDEO].loss_req])
    r0 = np.array([specs[HAPTIC].rate_req_bps, specs[VIDEO].rate_req_bps])
    s = kpis.slice_of_link

    # latency_sum <= tau0 * count is the exact integer form of mean <= tau0.
    tau_ok = kpis.latency_sum_ms <= tau0[s] * kpis.delivered_count
    concluded = kpis.delivered_count + kpis.discarded_count
    rho_ok = kpis.discarded_count <= rho0[s] * concluded
    required_bits = np.minimum(r0[s] * (kpis.window_ms * 1e-3),
                               kpis.arrived_bits)
    rate_ok = kpis.delivered_bits + kpis.queued_full_bits >= required_bits
    return tau_ok & rho_ok & rate_ok


def pair_satisfaction(link_ok: np.ndarray, pairs: int) -> np.ndarray:
    """Reduce per-link checks to per-pair under the standard link layout.

    Links are laid out operator-haptic ``0..U-1``, teleoperator-haptic
    ``U..2U-1``, teleoperator-video ``2U..3U-1``; pair ``i`` owns links
    ``(i, U+i, 2U+i)``.
    """
    if link_ok.shape[0] != 3 * pairs:
        raise ValueError("link_ok length must be 3 * pairs")
    u = pairs
    return link_ok[:u] & link_ok[u:2 * u] & link_ok[2 * u:3 * u]


def slice_stats(kpis: LinkKpis, se_row: np.ndarray) -> SliceKpis:
    """Aggregate link KPIs into the two slice summaries.

    Latency and loss pool packets across the slice; rate averages the
    per-link delivered rate.  The worst-user latency is the head-of-line
    wait of the haptic link with the lowest current SE (ties to the lowest
    link id, 0 when its buffer is empty).
    """
    se_row = np.asarray(se_row, dtype=np.float64)
    mean_se = np.zeros(2)
    mean_occ = np.zeros(2)
    latency = np.zeros(2)
    loss = np.zeros(2)
    rate = np.zeros(2)
    for sl in (HAPTIC, VIDEO):
        members = kpis.slice_of_link == sl
        n = int(members.sum())
        if n == 0:
            continue
        mean_se[sl] = se_row[members].mean()
        mean_occ[sl] = kpis.occupancy_bits[members].mean()
        delivered = int(kpis.delivered_count[members].sum())
        if delivered > 0:
            latency[sl] = kpis.latency_sum_ms[members].sum() / delivered
        concluded = delivered + int(kpis.discarded_count[members].sum())
        if concluded > 0:
            loss[sl] = kpis.discarded_count[members].sum() / concluded
        rate[sl] = (kpis.delivered_bits[members].sum()
                    / (kpis.window_ms * 1e-3)) / n
    haptic_members = np.flatnonzero(kpis.slice_of_link == HAPTIC)
    if haptic_members.size:
        worst = haptic_members[np.argmin(se_row[haptic_members])]
        worst_wait = float(kpis.hol_wait_ms[worst])
    else:
        worst_wait = 0.0
    return SliceKpis(
        mean_se=mean_se,
        mean_occupancy_bits=mean_occ,
        latency_ms=latency,
        loss=loss,
        rate_bps=rate,
        worst_user_latency_ms=worst_wait,
    )
