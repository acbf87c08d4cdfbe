import numpy as np
import pytest

import vhslice


@pytest.fixture
def small_cfg():
    """A 2-pair, short-horizon run configuration for fast structural tests."""
    return vhslice.RunConfig().replace_trial(pairs=2, trial_ttis=300,
                                             warmup_ttis=100, t_slice_ms=1)


def make_world(pairs=2, ttis=300, seed=0, **trial_kw):
    cfg = vhslice.RunConfig().replace_trial(pairs=pairs, trial_ttis=ttis,
                                            **trial_kw)
    return vhslice.build_world(cfg, seed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
