"""Packet sources: periodic haptic samples, jittered video frames, traces.

A source precomputes its whole dispatch schedule for the trial horizon from
its own RNG stream, so arrivals are reproducible regardless of query order.
Haptic sources emit one fixed-size packet per TTI (a perception-driven
reduction fraction suppresses packets at the source; suppressed packets are
never generated, they are not losses).  Video sources emit one frame per
nominal period with bounded per-packet jitter, clamped so dispatch order is
preserved.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .config import TrafficConfig

TRACE_HEADER = ("timestamp_ms", "payload_bits")


class TraceFormatError(ValueError):
    """A trace file is malformed; ``line`` is the offending 1-based line."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Packet:
    source_id: int
    seq: int
    arrival_tti: int
    size_bits: int


class TrafficSource:
    """One flow's precomputed dispatch schedule."""

    def __init__(self, source_id: int, arrival_ttis: np.ndarray,
                 size_bits: np.ndarray, horizon_ttis: int):
        if arrival_ttis.shape != size_bits.shape:
            raise ValueError("schedule arrays must have matching shapes")
        self.source_id = source_id
        self.arrival_ttis = arrival_ttis.astype(np.int64)
        self.size_bits = size_bits.astype(np.int64)
        self.horizon_ttis = horizon_ttis

    def __len__(self) -> int:
        return int(self.arrival_ttis.shape[0])


def generate_arrivals(source: TrafficSource, tti: int) -> list[Packet]:
    """Packets the source dispatches during TTI ``tti``."""
    lo = int(np.searchsorted(source.arrival_ttis, tti, side="left"))
    hi = int(np.searchsorted(source.arrival_ttis, tti, side="right"))
    return [
        Packet(source.source_id, k, int(source.arrival_ttis[k]),
               int(source.size_bits[k]))
        for k in range(lo, hi)
    ]


def _strictly_increasing(ttis: np.ndarray) -> np.ndarray:
    # t[i] = max(t[i], t[i-1] + 1) for all i, vectorised:
    # subtracting the index makes "strictly increasing" into "non-decreasing".
    if ttis.size == 0:
        return ttis
    idx = np.arange(ttis.shape[0], dtype=np.int64)
    return np.maximum.accumulate(ttis - idx) + idx


def haptic_source(source_id: int, cfg: TrafficConfig, horizon_ttis: int,
                  rng: np.random.Generator) -> TrafficSource:
    """One packet per TTI, minus packets suppressed at the source."""
    ttis = np.arange(horizon_ttis, dtype=np.int64)
    if cfg.pd_reduction > 0.0:
        keep = rng.random(horizon_ttis) >= cfg.pd_reduction
        ttis = ttis[keep]
    bits = np.full(ttis.shape[0], cfg.haptic_packet_bits, dtype=np.int64)
    return TrafficSource(source_id, ttis, bits, horizon_ttis)


def video_source(source_id: int, cfg: TrafficConfig, horizon_ttis: int,
                 rng: np.random.Generator) -> TrafficSource:
    """One frame per period at ``k * period + jitter``, order-preserving."""
    n_nominal = int(np.ceil(horizon_ttis / cfg.video_period_ms)) + 2
    ks = np.arange(n_nominal, dtype=np.float64)
    nominal = ks * cfg.video_period_ms
    jitter = rng.uniform(-cfg.video_jitter_ms, cfg.video_jitter_ms, n_nominal)
    dispatch = np.rint(nominal + jitter).astype(np.int64)
    dispatch = np.maximum(dispatch, 0)
    dispatch = _strictly_increasing(dispatch)
    keep = dispatch < horizon_ttis
    dispatch = dispatch[keep]
    bits = np.full(dispatch.shape[0], cfg.video_packet_bits, dtype=np.int64)
    return TrafficSource(source_id, dispatch, bits, horizon_ttis)


def trace_source(source_id: int, trace: "HapticTrace", horizon_ttis: int,
                 start_offset_ms: float = 0.0) -> TrafficSource:
    """Replay a recorded trace, mapping each sample to the nearest TTI."""
    ttis = np.rint(trace.timestamps_ms - trace.timestamps_ms[0]
                   + start_offset_ms).astype(np.int64)
    keep = (ttis >= 0) & (ttis < horizon_ttis)
    return TrafficSource(source_id, ttis[keep],
                         trace.payload_bits[keep].astype(np.int64),
                         horizon_ttis)


def build_arrival_table(sources: list[TrafficSource], horizon_ttis: int):
    """Merge source schedules into per-TTI slices for the step kernel.

    Returns ``(offsets, link_index, bits)`` where the arrivals of TTI ``t``
    are rows ``offsets[t]:offsets[t+1]``, ordered by source index.
    """
    all_ttis = []
    all_links = []
    all_bits = []
    for link_idx, src in enumerate(sources):
        all_ttis.append(src.arrival_ttis)
        all_links.append(np.full(len(src), link_idx, dtype=np.int64))
        all_bits.append(src.size_bits)
    ttis = np.concatenate(all_ttis) if all_ttis else np.empty(0, np.int64)
    links = np.concatenate(all_links) if all_links else np.empty(0, np.int64)
    bits = np.concatenate(all_bits) if all_bits else np.empty(0, np.int64)
    order = np.lexsort((links, ttis))
    ttis, links, bits = ttis[order], links[order], bits[order]
    counts = np.bincount(ttis, minlength=horizon_ttis).astype(np.int64)
    offsets = np.zeros(horizon_ttis + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, links, bits


@dataclass(frozen=True)
class HapticTrace:
    path: str
    timestamps_ms: np.ndarray
    payload_bits: np.ndarray

    @property
    def duration_ms(self) -> float:
        if self.timestamps_ms.size < 1:
            return 0.0
        return float(self.timestamps_ms[-1] - self.timestamps_ms[0])

    @property
    def mean_rate_bps(self) -> float:
        if self.duration_ms <= 0:
            return 0.0
        return float(self.payload_bits.sum()) / (self.duration_ms * 1e-3)


def load_haptic_trace(path: str) -> HapticTrace:
    """Parse a ``timestamp_ms,payload_bits`` CSV with strict validation."""
    timestamps: list[float] = []
    payloads: list[int] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        line_no = 0
        for row in reader:
            line_no += 1
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if line_no == 1 and tuple(c.strip() for c in row) == TRACE_HEADER:
                continue
            if len(row) != 2:
                raise TraceFormatError(path, line_no,
                                       f"expected 2 columns, got {len(row)}")
            try:
                ts = float(row[0])
                bits = int(row[1])
            except ValueError:
                raise TraceFormatError(path, line_no,
                                       f"non-numeric values {row!r}") from None
            if ts < 0:
                raise TraceFormatError(path, line_no, "negative timestamp")
            if bits <= 0:
                raise TraceFormatError(path, line_no,
                                       "payload_bits must be > 0")
            if timestamps and ts <= timestamps[-1]:
                raise TraceFormatError(
                    path, line_no,
                    f"timestamps must be strictly increasing "
                    f"({ts} after {timestamps[-1]})")
            timestamps.append(ts)
            payloads.append(bits)
    if not timestamps:
        raise TraceFormatError(path, max(line_no, 1), "trace has no samples")
    return HapticTrace(path, np.asarray(timestamps, dtype=np.float64),
                       np.asarray(payloads, dtype=np.int64))


def write_haptic_trace(path: str, timestamps_ms, payload_bits) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for ts, bits in zip(timestamps_ms, payload_bits):
            writer.writerow([format(float(ts), "g"), int(bits)])


def trace_summary(trace: HapticTrace) -> dict:
    """Statistics reported by the trace-validation command."""
    gaps = np.diff(trace.timestamps_ms)
    return {
        "samples": int(trace.timestamps_ms.size),
        "duration_ms": trace.duration_ms,
        "mean_rate_bps": trace.mean_rate_bps,
        "mean_interarrival_ms": float(gaps.mean()) if gaps.size else 0.0,
        "min_payload_bits": int(trace.payload_bits.min()),
        "max_payload_bits": int(trace.payload_bits.max()),
    }
