"""Configuration validation and JSON round-trips."""

import json

import pytest

from vhslice.config import (
    ChannelConfig,
    ConfigError,
    RanConfig,
    RewardConfig,
    RunConfig,
    SacConfig,
    SliceSpec,
    TrafficConfig,
    TrialConfig,
    baseline_reward_config,
    haptic_slice_spec,
    load_run_config,
    reward_config_for,
    run_config_from_dict,
    video_haptic_reward_config,
    video_slice_spec,
)


def test_default_slice_specs():
    h = haptic_slice_spec()
    assert (h.latency_req_ms, h.loss_req, h.rate_req_bps,
            h.max_buffer_delay_ms) == (10.0, 1e-5, 0.2e6, 20.0)
    v = video_slice_spec()
    assert (v.latency_req_ms, v.loss_req, v.rate_req_bps,
            v.max_buffer_delay_ms) == (50.0, 0.1, 4e6, 100.0)


def test_slice_spec_validation():
    with pytest.raises(ConfigError):
        SliceSpec("x", latency_req_ms=0.0, loss_req=0.1, rate_req_bps=1.0,
                  max_buffer_delay_ms=1.0)
    with pytest.raises(ConfigError):
        SliceSpec("x", latency_req_ms=10.0, loss_req=1.5, rate_req_bps=1.0,
                  max_buffer_delay_ms=20.0)
    with pytest.raises(ConfigError):
        SliceSpec("x", latency_req_ms=10.0, loss_req=0.1, rate_req_bps=1.0,
                  max_buffer_delay_ms=5.0)


def test_ran_config_derived_quantities():
    ran = RanConfig()
    assert ran.rb_hz == 200e3
    assert ran.rb_bits_per_se == 200.0
    with pytest.raises(ConfigError):
        RanConfig(num_rbs=1)


def test_traffic_config_validation():
    with pytest.raises(ConfigError):
        TrafficConfig(haptic_packet_bits=0)
    with pytest.raises(ConfigError):
        TrafficConfig(video_jitter_ms=-1.0)
    with pytest.raises(ConfigError):
        TrafficConfig(pd_reduction=1.5)


def test_channel_config_validation():
    with pytest.raises(ConfigError):
        ChannelConfig(mean_se=0.0)
    with pytest.raises(ConfigError):
        ChannelConfig(fluctuation=1.0)
    with pytest.raises(ConfigError):
        ChannelConfig(latent_std=0.0)


def test_reward_config_variants():
    assert video_haptic_reward_config().variant == "video_haptic"
    base = baseline_reward_config()
    assert base.variant == "baseline"
    assert base.latency_req_ms == (1.0, 50.0)
    with pytest.raises(ConfigError):
        reward_config_for("nope")
    with pytest.raises(ConfigError):
        RewardConfig(sync_tolerance_ms=0.0)


def test_sac_config_validation():
    with pytest.raises(ConfigError):
        SacConfig(learning_rate=0.0)
    with pytest.raises(ConfigError):
        SacConfig(gamma=1.5)
    with pytest.raises(ConfigError):
        SacConfig(buffer_capacity=10, batch_size=20)
    with pytest.raises(ConfigError):
        SacConfig(reward_floor=1.0)
    with pytest.raises(ConfigError):
        SacConfig(entropy_coeff=-0.1)
    assert SacConfig(entropy_coeff=0.0).entropy_coeff == 0.0


def test_trial_config_validation():
    with pytest.raises(ConfigError):
        TrialConfig(pairs=0)
    with pytest.raises(ConfigError):
        TrialConfig(t_slice_ms=0)
    with pytest.raises(ConfigError):
        TrialConfig(variant="nope")
    with pytest.raises(ConfigError):
        TrialConfig(intra_scheduler="fifo")


def test_run_config_json_roundtrip(tmp_path):
    cfg = RunConfig().replace_trial(pairs=5, t_slice_ms=50,
                                    eval_seeds=(7, 8))
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    back = load_run_config(str(path))
    assert back == cfg
    assert back.trial.eval_seeds == (7, 8)


def test_run_config_from_dict_partial_sections():
    cfg = run_config_from_dict({"trial": {"pairs": 3}})
    assert cfg.trial.pairs == 3
    assert cfg.ran == RanConfig()


def test_unknown_section_and_field_rejected():
    with pytest.raises(ConfigError):
        run_config_from_dict({"nope": {}})
    with pytest.raises(ConfigError):
        run_config_from_dict({"trial": {"nope": 1}})
    with pytest.raises(ConfigError):
        run_config_from_dict({"trial": "not-a-dict"})


def test_load_run_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / "absent.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_run_config(str(bad))


def test_tuple_fields_restored_from_lists():
    cfg = run_config_from_dict(json.loads(RunConfig().to_json()))
    assert isinstance(cfg.sac.hidden, tuple)
    assert isinstance(cfg.trial.eval_seeds, tuple)


def test_replace_helpers_do_not_mutate():
    cfg = RunConfig()
    cfg2 = cfg.replace_trial(pairs=9)
    assert cfg.trial.pairs == 20
    assert cfg2.trial.pairs == 9
