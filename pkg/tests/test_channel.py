"""Spectral-efficiency model: stationarity, bounds, replay, worst-link."""

import numpy as np
import pytest

from vhslice.channel import (
    ChannelModel,
    SeTraceFormatError,
    TraceChannel,
    load_se_trace,
    worst_se_link,
    write_se_trace,
)
from vhslice.config import ChannelConfig


def test_zero_fluctuation_is_constant():
    cfg = ChannelConfig(fluctuation=0.0)
    ch = ChannelModel(cfg, num_links=5, seed=42)
    for tti in (0, 17, 900):
        assert (ch.se_row(tti) == cfg.mean_se).all()


def test_se_stays_within_fluctuation_band():
    cfg = ChannelConfig(mean_se=5.0, fluctuation=0.25)
    ch = ChannelModel(cfg, num_links=8, seed=7)
    rows = np.stack([ch.se_row(t) for t in range(5000)])
    assert rows.min() >= 5.0 * 0.75 - 1e-12
    assert rows.max() <= 5.0 * 1.25 + 1e-12


def test_empirical_mean_close_to_nominal():
    cfg = ChannelConfig(mean_se=5.0, fluctuation=0.25)
    ch = ChannelModel(cfg, num_links=10, seed=3)
    rows = np.stack([ch.se_row(t) for t in range(10_000)])  # 1e5 samples
    assert rows.mean() == pytest.approx(5.0, rel=0.02)


def test_temporal_correlation_sign():
    # one-step autocorrelation of the latent should be near exp(-1/50)
    cfg = ChannelConfig(fluctuation=0.25, correlation_ms=50.0)
    ch = ChannelModel(cfg, num_links=4, seed=11)
    xs = np.stack([ch.latent_row(t) for t in range(20_000)])
    x0 = xs[:-1].ravel()
    x1 = xs[1:].ravel()
    rho = np.corrcoef(x0, x1)[0, 1]
    assert rho == pytest.approx(np.exp(-1.0 / 50.0), abs=0.02)


def test_query_order_independent():
    cfg = ChannelConfig()
    a = ChannelModel(cfg, num_links=3, seed=5)
    b = ChannelModel(cfg, num_links=3, seed=5)
    forward = np.stack([a.se_row(t) for t in range(3000)])
    b.se_row(2999)  # force generation past the block boundary first
    backward = np.stack([b.se_row(t) for t in range(3000)])
    np.testing.assert_array_equal(forward, backward)


def test_links_are_independent_streams():
    cfg = ChannelConfig(fluctuation=0.5)
    ch = ChannelModel(cfg, num_links=2, seed=1)
    xs = np.stack([ch.latent_row(t) for t in range(5000)])
    rho = np.corrcoef(xs[:, 0], xs[:, 1])[0, 1]
    assert abs(rho) < 0.15


def test_negative_tti_rejected():
    ch = ChannelModel(ChannelConfig(), num_links=1, seed=0)
    with pytest.raises(ValueError):
        ch.se_row(-1)


def test_unknown_link_rejected():
    ch = ChannelModel(ChannelConfig(), num_links=2, seed=0)
    with pytest.raises(ValueError):
        ch.sample_se(5, 0)


# -- worst link ------------------------------------------------------------


def test_worst_of_two():
    assert worst_se_link(np.array([5.0, 4.2])) == 1


def test_worst_tie_lowest_id():
    assert worst_se_link(np.array([3.0, 3.0, 3.0])) == 0


def test_worst_matches_brute_force(rng):
    for _ in range(100):
        se = rng.uniform(1.0, 8.0, size=20)
        best = min(range(20), key=lambda i: (se[i], i))
        assert worst_se_link(se) == best


def test_worst_with_candidate_subset():
    se = np.array([1.0, 9.0, 2.0, 0.5])
    assert worst_se_link(se, candidates=np.array([1, 2])) == 2


def test_worst_empty_rejected():
    with pytest.raises(ValueError):
        worst_se_link(np.array([]))


# -- trace replay ------------------------------------------------------------


def test_trace_channel_replay():
    matrix = np.array([[5.0, 4.0], [5.5, 4.5]])
    ch = TraceChannel(matrix)
    assert ch.se_row(1).tolist() == [5.5, 4.5]
    with pytest.raises(ValueError):
        ch.se_row(2)


def test_trace_channel_rejects_nonpositive():
    with pytest.raises(ValueError):
        TraceChannel(np.array([[5.0, 0.0]]))


def test_se_trace_roundtrip(tmp_path):
    matrix = np.array([[5.0, 4.25], [5.125, 4.5], [4.75, 5.0]])
    path = str(tmp_path / "se.csv")
    write_se_trace(path, matrix)
    got = load_se_trace(path)
    np.testing.assert_array_equal(got, matrix)


def test_se_trace_rejects_gaps(tmp_path):
    path = tmp_path / "se.csv"
    path.write_text("tti,user_id,se_bits_per_hz\n0,0,5.0\n0,1,4.0\n1,0,5.0\n",
                    encoding="utf-8")
    with pytest.raises(SeTraceFormatError):
        load_se_trace(str(path))


def test_se_trace_rejects_unsorted(tmp_path):
    path = tmp_path / "se.csv"
    path.write_text("0,1,5.0\n0,0,4.0\n", encoding="utf-8")
    with pytest.raises(SeTraceFormatError):
        load_se_trace(str(path))
