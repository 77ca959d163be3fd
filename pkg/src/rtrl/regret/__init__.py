from .measures import (
    chain_env_factory,
    delay_regret,
    expected_delay_regret,
    expected_inaction_regret,
    inaction_regret,
)
from .policies import delayed_optimal, fixed_action_policy, undelayed_optimal, uniform_policy
from .report import RegretReport
from .sweep import SWEEP_COLUMNS, SweepSpec, run_sweep, write_sweep_csv

__all__ = [
    "chain_env_factory",
    "delay_regret",
    "expected_delay_regret",
    "expected_inaction_regret",
    "inaction_regret",
    "delayed_optimal",
    "fixed_action_policy",
    "undelayed_optimal",
    "uniform_policy",
    "RegretReport",
    "SWEEP_COLUMNS",
    "SweepSpec",
    "run_sweep",
    "write_sweep_csv",
]
