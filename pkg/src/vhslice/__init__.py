"""Radio-resource slicing simulator for paired haptic and video flows.

A discrete-time (1 ms TTI) two-slice radio model where operator and
teleoperator pairs exchange fixed-rate haptic packets and jittered video
frames over fading links, and a soft actor-critic agent learns the
inter-slice resource-block split that keeps latency, loss, and rate
requirements satisfied.
"""

__version__ = "0.1.0"

from .accel import NUMBA_ENABLED
from .agent import ReplayBuffer, SacAgent, SlicingAction, map_action
from .channel import (
    ChannelModel,
    SeTraceFormatError,
    TraceChannel,
    load_se_trace,
    worst_se_link,
    write_se_trace,
)
from .config import (
    HAPTIC,
    VIDEO,
    VARIANT_BASELINE,
    VARIANT_VIDEO_HAPTIC,
    ChannelConfig,
    ConfigError,
    RanConfig,
    RewardConfig,
    RunConfig,
    SacConfig,
    SliceSpec,
    TrafficConfig,
    TrialConfig,
    haptic_slice_spec,
    load_run_config,
    run_config_from_dict,
    video_slice_spec,
)
from .experiment import (
    AgentPolicy,
    FixedSplitPolicy,
    TrialResult,
    build_world,
    evaluate_agent,
    load_manifest,
    read_results_csv,
    recount_sr_from_kpi_log,
    run_interval_study,
    run_sweep,
    run_sweep_to_dir,
    run_trial,
    train_agent,
    write_manifest,
    write_results_csv,
)
from .ran import LinkKpis, RanState, SliceKpis, check_satisfaction, pair_satisfaction
from .reward import RewardBreakdown, total_reward
from .scheduler import RoundRobinScheduler, proportional_allocate
from .traffic import (
    HapticTrace,
    Packet,
    TraceFormatError,
    TrafficSource,
    build_arrival_table,
    haptic_source,
    load_haptic_trace,
    trace_source,
    video_source,
    write_haptic_trace,
)
from .world import OBS_DIM, World

__all__ = [
    "__version__",
    "NUMBA_ENABLED",
    "ReplayBuffer",
    "SacAgent",
    "SlicingAction",
    "map_action",
    "ChannelModel",
    "SeTraceFormatError",
    "TraceChannel",
    "load_se_trace",
    "worst_se_link",
    "write_se_trace",
    "HAPTIC",
    "VIDEO",
    "VARIANT_BASELINE",
    "VARIANT_VIDEO_HAPTIC",
    "ChannelConfig",
    "ConfigError",
    "RanConfig",
    "RewardConfig",
    "RunConfig",
    "SacConfig",
    "SliceSpec",
    "TrafficConfig",
    "TrialConfig",
    "haptic_slice_spec",
    "load_run_config",
    "run_config_from_dict",
    "video_slice_spec",
    "AgentPolicy",
    "FixedSplitPolicy",
    "TrialResult",
    "build_world",
    "evaluate_agent",
    "load_manifest",
    "read_results_csv",
    "recount_sr_from_kpi_log",
    "run_interval_study",
    "run_sweep",
    "run_sweep_to_dir",
    "run_trial",
    "train_agent",
    "write_manifest",
    "write_results_csv",
    "LinkKpis",
    "RanState",
    "SliceKpis",
    "check_satisfaction",
    "pair_satisfaction",
    "RewardBreakdown",
    "total_reward",
    "RoundRobinScheduler",
    "proportional_allocate",
    "HapticTrace",
    "Packet",
    "TraceFormatError",
    "TrafficSource",
    "build_arrival_table",
    "haptic_source",
    "load_haptic_trace",
    "trace_source",
    "video_source",
    "write_haptic_trace",
    "OBS_DIM",
    "World",
]
