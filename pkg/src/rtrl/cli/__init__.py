from .configio import ConfigError, apply_env_overrides, check_keys, load_yaml_mapping
from .experiment import ExperimentConfig, build_env_factory, build_train_config, load_experiment
from .main import main

__all__ = [
    "ConfigError",
    "apply_env_overrides",
    "check_keys",
    "load_yaml_mapping",
    "ExperimentConfig",
    "build_env_factory",
    "build_train_config",
    "load_experiment",
    "main",
]
