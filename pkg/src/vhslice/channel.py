"""Per-link spectral-efficiency processes and trace replay.

The synthetic model keeps one clipped AR(1) latent value per link and maps
it affinely into the envelope ``mean_se * (1 ± fluctuation)``, so bounds
hold by construction.  Paths are generated lazily in fixed-size blocks from
a single seeded stream, which makes the sequence independent of query order.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from . import kernels
from .config import ChannelConfig

SE_TRACE_HEADER = ("tti", "user_id", "se_bits_per_hz")


class SeTraceFormatError(ValueError):
    """An SE trace file is malformed; ``line`` is the 1-based line."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class ChannelModel:
    """Clipped AR(1) spectral efficiency for ``num_links`` links."""

    _BLOCK = 2048

    def __init__(self, cfg: ChannelConfig, num_links: int, seed):
        if num_links < 1:
            raise ValueError("num_links must be >= 1")
        self.cfg = cfg
        self.num_links = num_links
        self.phi = math.exp(-1.0 / cfg.correlation_ms)
        self._innov_scale = cfg.latent_std * math.sqrt(1.0 - self.phi * self.phi)
        self._rng = np.random.default_rng(seed)
        init = np.clip(self._rng.standard_normal(num_links) * cfg.latent_std,
                       -1.0, 1.0)
        self._state = init
        self._rows = np.empty((0, num_links), dtype=np.float64)
        self._generated = 0

    def _extend_to(self, tti: int) -> None:
        while self._generated <= tti:
            n = self._BLOCK
            normals = self._rng.standard_normal((n, self.num_links))
            normals *= self._innov_scale
            block = np.empty((n, self.num_links), dtype=np.float64)
            kernels.ar1_paths(normals, self.phi, self._state, block)
            self._state = block[-1].copy()
            self._rows = np.vstack([self._rows, block])
            self._generated += n

    def latent_row(self, tti: int) -> np.ndarray:
        if tti < 0:
            raise ValueError("tti must be >= 0")
        self._extend_to(tti)
        return self._rows[tti]

    def se_row(self, tti: int) -> np.ndarray:
        """Spectral efficiency of every link at ``tti`` (bits/s/Hz)."""
        x = self.latent_row(tti)
        return self.cfg.mean_se * (1.0 + self.cfg.fluctuation * x)

    def sample_se(self, link: int, tti: int) -> float:
        if not 0 <= link < self.num_links:
            raise ValueError(f"unknown link id {link}")
        return float(self.se_row(tti)[link])


class TraceChannel:
    """SE replay from a dense (tti, link) matrix."""

    def __init__(self, matrix: np.ndarray):
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ValueError("SE trace matrix must be 2-D and non-empty")
        if np.any(matrix <= 0):
            raise ValueError("SE values must be > 0")
        self._matrix = np.asarray(matrix, dtype=np.float64)
        self.num_links = self._matrix.shape[1]
        self.horizon = self._matrix.shape[0]

    def se_row(self, tti: int) -> np.ndarray:
        if not 0 <= tti < self.horizon:
            raise ValueError(f"tti {tti} outside trace horizon {self.horizon}")
        return self._matrix[tti]

    def sample_se(self, link: int, tti: int) -> float:
        if not 0 <= link < self.num_links:
            raise ValueError(f"unknown link id {link}")
        return float(self.se_row(tti)[link])


def worst_se_link(se_row: np.ndarray, candidates: np.ndarray | None = None) -> int:
    """Index of the lowest-SE link; ties resolve to the lowest id."""
    se_row = np.asarray(se_row)
    if candidates is not None:
        candidates = np.asarray(candidates)
        if candidates.size == 0:
            raise ValueError("candidates must be non-empty")
        return int(candidates[np.argmin(se_row[candidates])])
    if se_row.size == 0:
        raise ValueError("se_row must be non-empty")
    return int(np.argmin(se_row))


def load_se_trace(path: str) -> np.ndarray:
    """Parse a ``tti,user_id,se_bits_per_hz`` CSV into a dense matrix.

    Rows must be sorted by (tti, user_id) and cover every link at every TTI.
    """
    entries: list[tuple[int, int, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        line_no = 0
        prev_key: tuple[int, int] | None = None
        for row in reader:
            line_no += 1
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if line_no == 1 and tuple(c.strip() for c in row) == SE_TRACE_HEADER:
                continue
            if len(row) != 3:
                raise SeTraceFormatError(path, line_no,
                                         f"expected 3 columns, got {len(row)}")
            try:
                tti = int(row[0])
                link = int(row[1])
                se = float(row[2])
            except ValueError:
                raise SeTraceFormatError(path, line_no,
                                         f"non-numeric values {row!r}") from None
            if tti < 0 or link < 0:
                raise SeTraceFormatError(path, line_no, "negative tti or user_id")
            if se <= 0:
                raise SeTraceFormatError(path, line_no, "se must be > 0")
            key = (tti, link)
            if prev_key is not None and key <= prev_key:
                raise SeTraceFormatError(path, line_no,
                                         "rows must be sorted by (tti, user_id)")
            prev_key = key
            entries.append((tti, link, se))
    if not entries:
        raise SeTraceFormatError(path, max(line_no, 1), "trace has no rows")
    horizon = max(e[0] for e in entries) + 1
    links = max(e[1] for e in entries) + 1
    if len(entries) != horizon * links:
        raise SeTraceFormatError(
            path, line_no,
            f"expected {horizon * links} rows for a dense "
            f"{horizon}x{links} grid, got {len(entries)}")
    matrix = np.empty((horizon, links), dtype=np.float64)
    for tti, link, se in entries:
        matrix[tti, link] = se
    return matrix


def write_se_trace(path: str, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SE_TRACE_HEADER)
        for tti in range(matrix.shape[0]):
            for link in range(matrix.shape[1]):
                writer.writerow([tti, link, repr(float(matrix[tti, link]))])
