"""Compiled vs interpreted timings for the hot per-TTI kernels.

Run: python3 benchmarks/bench_kernels.py

The interpreted measurements call the exact same function bodies (numba's
``py_func``), so the comparison is apples to apples; the two paths produce
bit-identical results (asserted in tests/test_kernels.py).  With numba
disabled (``VHSLICE_DISABLE_NUMBA=1``) only the interpreted path is timed.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np

_src = Path(__file__).resolve().parent.parent / "src"
if _src.exists() and str(_src) not in sys.path:
    sys.path.insert(0, str(_src))

from vhslice import kernels
from vhslice.accel import NUMBA_ENABLED
from vhslice.config import RunConfig
from vhslice.experiment import build_world

N_WARMUP = 2
N_RUNS = 5


def _interpreted(fn):
    return getattr(fn, "py_func", fn)


def _report(label, times_fast, times_slow):
    fast = np.mean(times_fast) * 1e3 if times_fast else None
    slow = np.mean(times_slow) * 1e3
    if fast is None:
        print(f"{label:<24} interpreted {slow:9.2f} ms")
        return
    std_f = np.std(times_fast) * 1e3
    std_s = np.std(times_slow) * 1e3
    print(f"{label:<24} compiled {fast:9.2f} +- {std_f:6.2f} ms   "
          f"interpreted {slow:9.2f} +- {std_s:6.2f} ms   "
          f"speedup {slow / fast:6.1f}x")


def _time(runner, fn):
    for _ in range(N_WARMUP):
        runner(fn)
    return [runner(fn) for _ in range(N_RUNS)]


def bench_alloc(name, calls=5000, n_users=60, total_rbs=88):
    rng = np.random.default_rng(0)
    occs = rng.integers(0, 1 << 20, size=(64, n_users)).astype(np.int64)
    occs[0] = 0  # all-empty slice shows up in real trials too
    out = np.empty(n_users, dtype=np.int64)
    kernel = getattr(kernels, name)

    if name == "round_robin_alloc":
        def runner(fn):
            off = 0
            t0 = time.perf_counter()
            for i in range(calls):
                off = fn(occs[i % 64], total_rbs, off, out)
            return time.perf_counter() - t0
    else:
        def runner(fn):
            t0 = time.perf_counter()
            for i in range(calls):
                fn(occs[i % 64], total_rbs, out)
            return time.perf_counter() - t0

    slow = _time(runner, _interpreted(kernel))
    fast = _time(runner, kernel) if NUMBA_ENABLED else None
    _report(f"{name} x{calls}", fast, slow)


def bench_ar1(ttis=20000, links=60):
    rng = np.random.default_rng(1)
    normals = rng.standard_normal((ttis, links)) * 0.05
    init = np.clip(rng.standard_normal(links) * 0.5, -1.0, 1.0)
    out = np.empty((ttis, links))

    def runner(fn):
        t0 = time.perf_counter()
        fn(normals, 0.99, init, out)
        return time.perf_counter() - t0

    slow = _time(runner, _interpreted(kernels.ar1_paths))
    fast = _time(runner, kernels.ar1_paths) if NUMBA_ENABLED else None
    _report(f"ar1_paths {ttis}x{links}", fast, slow)


_KERNEL_NAMES = ("ran_step", "largest_remainder_alloc", "round_robin_alloc",
                 "ar1_paths")


def bench_trial(ttis=2000, pairs=20):
    """Full stepping loop: arrivals, channel, scheduler, buffers, windows."""
    cfg = RunConfig().replace_trial(pairs=pairs, trial_ttis=ttis + 300)

    def run_steps():
        world = build_world(cfg, (0, 0))
        world.set_split(12)
        for _ in range(300):  # fill the KPI window before timing
            world.step()
        t0 = time.perf_counter()
        for _ in range(ttis):
            world.step()
        return time.perf_counter() - t0

    def interpreted_steps():
        saved = {k: getattr(kernels, k) for k in _KERNEL_NAMES}
        for k in _KERNEL_NAMES:
            setattr(kernels, k, _interpreted(saved[k]))
        try:
            return run_steps()
        finally:
            for k, fn in saved.items():
                setattr(kernels, k, fn)

    slow = _time(lambda f: f(), interpreted_steps)
    fast = _time(lambda f: f(), run_steps) if NUMBA_ENABLED else None
    _report(f"trial loop {ttis} TTIs", fast, slow)
    base = np.mean(fast if fast is not None else slow)
    print(f"{'':<24} -> {ttis / base / 1e3:.1f}k TTI/s "
          f"({pairs} pairs, {3 * pairs} links)")


def main():
    print(f"numba enabled: {NUMBA_ENABLED}")
    print(f"warmup {N_WARMUP}, timed runs {N_RUNS}\n")
    bench_alloc("largest_remainder_alloc")
    bench_alloc("round_robin_alloc")
    bench_ar1()
    bench_trial()


if __name__ == "__main__":
    main()
