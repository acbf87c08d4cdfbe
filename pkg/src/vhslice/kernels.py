"""Hot per-TTI loops, written njit-compatible.

Everything here operates on preallocated numpy arrays with integer bit
accounting so the conservation identity (arrived = sent + discarded +
buffer delta) holds exactly.  See :mod:`vhslice.accel` for how the compiled
and interpreted paths are selected.
"""

from __future__ import annotations

import numpy as np

from .accel import maybe_njit


@maybe_njit(cache=True)
def largest_remainder_alloc(occupancy, total_rbs, out):
    """Split ``total_rbs`` proportionally to ``occupancy`` (int64 arrays).

    Integer floor shares first, then one extra RB per largest remainder
    (ties broken toward the lowest index).  All-zero occupancy yields an
    all-zero allocation; users with zero occupancy never receive RBs.
    """
    n = occupancy.shape[0]
    total = np.int64(0)
    for i in range(n):
        total += occupancy[i]
    if total == 0 or total_rbs == 0:
        for i in range(n):
            out[i] = 0
        return
    assigned = np.int64(0)
    remainders = np.empty(n, dtype=np.int64)
    for i in range(n):
        prod = occupancy[i] * total_rbs
        out[i] = prod // total
        remainders[i] = prod % total
        assigned += out[i]
    leftover = total_rbs - assigned
    for _ in range(leftover):
        best = -1
        best_rem = np.int64(-1)
        for i in range(n):
            if remainders[i] > best_rem:
                best_rem = remainders[i]
                best = i
        out[best] += 1
        remainders[best] = -1


@maybe_njit(cache=True)
def round_robin_alloc(occupancy, total_rbs, offset, out):
    """Deal ``total_rbs`` one at a time, cyclically from ``offset``.

    Users with zero occupancy are skipped.  Returns the next offset so the
    first-served position rotates across calls.
    """
    n = occupancy.shape[0]
    for i in range(n):
        out[i] = 0
    eligible = 0
    for i in range(n):
        if occupancy[i] > 0:
            eligible += 1
    if eligible == 0 or total_rbs == 0:
        return (offset + 1) % n if n > 0 else 0
    pos = offset % n
    dealt = np.int64(0)
    while dealt < total_rbs:
        if occupancy[pos] > 0:
            out[pos] += 1
            dealt += 1
        pos = (pos + 1) % n
    return (offset + 1) % n


@maybe_njit(cache=True)
def ar1_paths(normals, phi, init, out):
    """Clipped AR(1) latent paths, one column per link.

    ``normals`` holds i.i.d. standard normals (T, L); ``init`` the stationary
    start values (already clipped).  Innovation scale preserves the
    stationary standard deviation encoded in ``init``/``normals`` scaling
    done by the caller; here normals come pre-scaled.
    """
    T = normals.shape[0]
    L = normals.shape[1]
    for l in range(L):
        prev = init[l]
        for t in range(T):
            x = phi * prev + normals[t, l]
            if x > 1.0:
                x = 1.0
            elif x < -1.0:
                x = -1.0
            out[t, l] = x
            prev = x


@maybe_njit(cache=True)
def ran_step(
    tti,
    # FIFO ring state, per link
    head, count, ring_arrival, ring_size, ring_remaining,
    occupancy_bits, queued_full_bits,
    # static layout
    link_slice, slice_links, slice_offsets, max_delay_ttis,
    # this TTI's inputs
    arrival_link, arrival_bits, se_row, slice_rbs,
    rb_bits_per_se, intra_round_robin, rr_offsets,
    # sliding-window accounting: rings (L, W) plus running sums (L,)
    window_slot,
    w_arrived, w_delivered_bits, w_delivered_cnt, w_latency_sum,
    w_discarded_cnt, w_discarded_bits,
    s_arrived, s_delivered_bits, s_delivered_cnt, s_latency_sum,
    s_discarded_cnt, s_discarded_bits,
    # outputs, per link
    out_sent, out_delivered, out_discarded, out_arrived_bits,
    out_discarded_remaining, alloc,
):
    """Advance every link buffer by one TTI.

    Order of operations: retire the expiring window slot, append arrivals,
    discard deadline-expired head-of-line packets, allocate RBs inside each
    slice, transmit (partial head-of-line service), and account the window.
    ``queued_full_bits`` tracks the original sizes of still-queued packets
    (used by the rate-satisfaction check); ``occupancy_bits`` tracks bits
    remaining to transmit (used by the scheduler and observations).
    """
    n_links = head.shape[0]
    cap = ring_arrival.shape[1]

    # Retire the slot that now falls out of the sliding window.
    for l in range(n_links):
        s_arrived[l] -= w_arrived[l, window_slot]
        s_delivered_bits[l] -= w_delivered_bits[l, window_slot]
        s_delivered_cnt[l] -= w_delivered_cnt[l, window_slot]
        s_latency_sum[l] -= w_latency_sum[l, window_slot]
        s_discarded_cnt[l] -= w_discarded_cnt[l, window_slot]
        s_discarded_bits[l] -= w_discarded_bits[l, window_slot]
        w_arrived[l, window_slot] = 0
        w_delivered_bits[l, window_slot] = 0
        w_delivered_cnt[l, window_slot] = 0
        w_latency_sum[l, window_slot] = 0
        w_discarded_cnt[l, window_slot] = 0
        w_discarded_bits[l, window_slot] = 0
        out_sent[l] = 0
        out_delivered[l] = 0
        out_discarded[l] = 0
        out_arrived_bits[l] = 0
        out_discarded_remaining[l] = 0
        alloc[l] = 0

    # Arrivals. A full ring force-discards the head packet (counted as loss).
    for k in range(arrival_link.shape[0]):
        l = arrival_link[k]
        bits = arrival_bits[k]
        if count[l] == cap:
            h = head[l]
            rem = ring_remaining[l, h]
            size = ring_size[l, h]
            occupancy_bits[l] -= rem
            queued_full_bits[l] -= size
            out_discarded[l] += 1
            out_discarded_remaining[l] += rem
            w_discarded_cnt[l, window_slot] += 1
            s_discarded_cnt[l] += 1
            w_discarded_bits[l, window_slot] += size
            s_discarded_bits[l] += size
            head[l] = (h + 1) % cap
            count[l] -= 1
        slot = (head[l] + count[l]) % cap
        ring_arrival[l, slot] = tti
        ring_size[l, slot] = bits
        ring_remaining[l, slot] = bits
        count[l] += 1
        occupancy_bits[l] += bits
        queued_full_bits[l] += bits
        out_arrived_bits[l] += bits
        w_arrived[l, window_slot] += bits
        s_arrived[l] += bits

    # Deadline expiry: a packet present for more than max_delay slots is lost.
    for l in range(n_links):
        limit = max_delay_ttis[link_slice[l]]
        while count[l] > 0:
            h = head[l]
            if tti - ring_arrival[l, h] + 1 <= limit:
                break
            rem = ring_remaining[l, h]
            size = ring_size[l, h]
            occupancy_bits[l] -= rem
            queued_full_bits[l] -= size
            out_discarded[l] += 1
            out_discarded_remaining[l] += rem
            w_discarded_cnt[l, window_slot] += 1
            s_discarded_cnt[l] += 1
            w_discarded_bits[l, window_slot] += size
            s_discarded_bits[l] += size
            head[l] = (h + 1) % cap
            count[l] -= 1

    # Intra-slice allocation on current backlog.
    for s in range(slice_offsets.shape[0] - 1):
        lo = slice_offsets[s]
        hi = slice_offsets[s + 1]
        members = slice_links[lo:hi]
        occ = np.empty(hi - lo, dtype=np.int64)
        share = np.empty(hi - lo, dtype=np.int64)
        for j in range(hi - lo):
            occ[j] = occupancy_bits[members[j]]
        if intra_round_robin:
            rr_offsets[s] = round_robin_alloc(occ, slice_rbs[s], rr_offsets[s], share)
        else:
            largest_remainder_alloc(occ, slice_rbs[s], share)
        for j in range(hi - lo):
            alloc[members[j]] = share[j]

    # Transmission with partial head-of-line service.
    for l in range(n_links):
        if alloc[l] == 0 or count[l] == 0:
            continue
        budget = np.int64(rb_bits_per_se * alloc[l] * se_row[l])
        while budget > 0 and count[l] > 0:
            h = head[l]
            rem = ring_remaining[l, h]
            if rem <= budget:
                budget -= rem
                occupancy_bits[l] -= rem
                out_sent[l] += rem
                size = ring_size[l, h]
                queued_full_bits[l] -= size
                latency = tti - ring_arrival[l, h] + 1
                out_delivered[l] += 1
                w_delivered_bits[l, window_slot] += size
                s_delivered_bits[l] += size
                w_delivered_cnt[l, window_slot] += 1
                s_delivered_cnt[l] += 1
                w_latency_sum[l, window_slot] += latency
                s_latency_sum[l] += latency
                head[l] = (h + 1) % cap
                count[l] -= 1
            else:
                ring_remaining[l, h] = rem - budget
                occupancy_bits[l] -= budget
                out_sent[l] += budget
                budget = 0
