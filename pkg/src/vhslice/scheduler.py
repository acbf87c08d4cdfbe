"""Intra-slice resource-block scheduling.

Two policies: proportional-to-backlog with largest-remainder rounding (the
default) and a round-robin baseline.  Both allocate whole RBs, never exceed
the slice budget, and give zero RBs to users with empty buffers.
"""

from __future__ import annotations

import numpy as np

from . import kernels


def proportional_allocate(slice_rbs: int, occupancy_bits) -> np.ndarray:
    """Whole-RB shares proportional to buffer occupancy.

    Each user first receives ``floor(occupancy_u / total * slice_rbs)``;
    remaining RBs go one each to the largest fractional remainders, ties to
    the lowest user index.  An all-empty slice allocates nothing.
    """
    occ = np.asarray(occupancy_bits, dtype=np.int64)
    if occ.ndim != 1:
        raise ValueError("occupancy_bits must be one-dimensional")
    if slice_rbs < 0:
        raise ValueError("slice_rbs must be >= 0")
    if occ.size and occ.min() < 0:
        raise ValueError("buffer occupancy must be >= 0")
    out = np.zeros(occ.shape[0], dtype=np.int64)
    if occ.size:
        kernels.largest_remainder_alloc(occ, np.int64(slice_rbs), out)
    return out


class RoundRobinScheduler:
    """Deals RBs one at a time in cyclic user order from a rotating offset."""

    def __init__(self, num_users: int):
        if num_users < 1:
            raise ValueError("num_users must be >= 1")
        self.num_users = num_users
        self.offset = 0

    def allocate(self, slice_rbs: int, occupancy_bits) -> np.ndarray:
        occ = np.asarray(occupancy_bits, dtype=np.int64)
        if occ.shape[0] != self.num_users:
            raise ValueError("occupancy vector does not match num_users")
        if slice_rbs < 0:
            raise ValueError("slice_rbs must be >= 0")
        if occ.size and occ.min() < 0:
            raise ValueError("buffer occupancy must be >= 0")
        out = np.zeros(self.num_users, dtype=np.int64)
        self.offset = int(
            kernels.round_robin_alloc(occ, np.int64(slice_rbs),
                                      np.int64(self.offset), out)
        )
        return out
