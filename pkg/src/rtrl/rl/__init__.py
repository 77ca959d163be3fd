from .buffer import ReplayBuffer
from .config import PpoConfig, SacConfig
from .evaluate import Agent, EvalReport, evaluate, load_agent, save_agent
from .gae import gae_advantages
from .io import METRIC_COLUMNS, Checkpoint, MetricsWriter, load_checkpoint, save_checkpoint
from .networks import Mlp, TwinQ, polyak_update
from .ppo import PpoResult, train_ppo
from .sac import SacResult, train_sac

__all__ = [
    "ReplayBuffer",
    "PpoConfig",
    "SacConfig",
    "Agent",
    "EvalReport",
    "evaluate",
    "load_agent",
    "save_agent",
    "gae_advantages",
    "METRIC_COLUMNS",
    "Checkpoint",
    "MetricsWriter",
    "load_checkpoint",
    "save_checkpoint",
    "Mlp",
    "TwinQ",
    "polyak_update",
    "PpoResult",
    "train_ppo",
    "SacResult",
    "train_sac",
]
