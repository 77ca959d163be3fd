from .core import Box, Discrete, Env, EnvSpec, obs_hash, record_episode, write_episode_trace
from .delayed import AugmentedObs, DelayedEnv, DelayedEnvConfig, delayed_wrap
from .doorkey import DoorKeyEnv, Layout, sample_layout
from .markov import MarkovCheckReport, markov_check, mixed_tracker_policy, uniform_random_policy
from .pointmass import PointMassEnv, pd_policy
from .worstcase import WorstCaseEnv

__all__ = [
    "Box",
    "Discrete",
    "Env",
    "EnvSpec",
    "obs_hash",
    "record_episode",
    "write_episode_trace",
    "AugmentedObs",
    "DelayedEnv",
    "DelayedEnvConfig",
    "delayed_wrap",
    "DoorKeyEnv",
    "Layout",
    "sample_layout",
    "MarkovCheckReport",
    "markov_check",
    "mixed_tracker_policy",
    "uniform_random_policy",
    "PointMassEnv",
    "pd_policy",
    "WorstCaseEnv",
]
