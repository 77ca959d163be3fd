"""Typed experiment configuration and the factories it resolves to.

One YAML file describes everything a subcommand might need; each
subcommand validates only the sections it uses.  Unknown keys anywhere
are rejected with the file:line of the offending key.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ..bench.harness import BenchConfig
from ..envs import DelayedEnvConfig, DoorKeyEnv, PointMassEnv, WorstCaseEnv, delayed_wrap
from ..regret.sweep import SweepSpec
from ..rl import PpoConfig, SacConfig
from .configio import ConfigError, apply_env_overrides, check_keys, load_yaml_mapping

__all__ = ["ExperimentConfig", "load_experiment", "build_env_factory", "build_train_config"]

TOP_KEYS = (
    "env", "wrapper", "topology", "algorithm", "train", "seeds", "out_dir", "mode",
    "preset", "eval_episodes", "normalize_baseline", "eval", "regret", "bench",
)

ENV_KEYS = {
    "pointmass": ("name", "dim", "dt", "max_steps", "start_radius"),
    "worstcase": ("name", "n_states", "p", "max_steps"),
    "doorkey": ("name", "size", "max_steps"),
}
ENV_CLASSES = {"pointmass": PointMassEnv, "worstcase": WorstCaseEnv, "doorkey": DoorKeyEnv}

WRAPPER_KEYS = tuple(f.name for f in dataclasses.fields(DelayedEnvConfig))
TOPOLOGY_KEYS = ("variant", "depth", "hidden_dim", "exec_time")
EVAL_KEYS = ("checkpoint", "episodes", "deterministic", "dropout_p")
SAC_KEYS = tuple(f.name for f in dataclasses.fields(SacConfig))
PPO_KEYS = tuple(f.name for f in dataclasses.fields(PpoConfig))
REGRET_KEYS = tuple(f.name for f in dataclasses.fields(SweepSpec))
BENCH_KEYS = tuple(f.name for f in dataclasses.fields(BenchConfig))


@dataclass(frozen=True)
class ExperimentConfig:
    env: dict | None
    wrapper: dict | None
    topology: dict | None
    algorithm: str | None
    train: dict
    seeds: tuple
    out_dir: str
    mode: str
    preset: str
    eval_episodes: int
    normalize_baseline: str | None
    eval: dict | None
    regret: dict
    bench: dict

    def resolved(self) -> dict:
        """Plain mapping for echoing into output directories."""
        doc = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            doc[f.name] = list(value) if isinstance(value, tuple) else value
        return doc

    def require(self, *names: str) -> None:
        for name in names:
            if not getattr(self, name):
                raise ConfigError(f"this command needs a '{name}' section in the config")


def _section(data, name, lines, filename) -> dict:
    value = data.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict):
        line = lines.get((name,))
        where = f"{filename}:{line}" if line else filename
        raise ConfigError(f"{where}: section '{name}' must be a mapping")
    return value


def load_experiment(path, *, environ=None) -> ExperimentConfig:
    data, lines, filename = load_yaml_mapping(path)
    apply_env_overrides(data, environ)
    check_keys(data, TOP_KEYS, (), lines, filename)

    env = _section(data, "env", lines, filename) or None
    if env is not None:
        name = env.get("name")
        if name not in ENV_CLASSES:
            raise ConfigError(f"{filename}: env.name must be one of {sorted(ENV_CLASSES)}, got {name!r}")
        check_keys(env, ENV_KEYS[name], ("env",), lines, filename)

    wrapper = _section(data, "wrapper", lines, filename) or None
    if wrapper is not None:
        check_keys(wrapper, WRAPPER_KEYS, ("wrapper",), lines, filename)

    topology = _section(data, "topology", lines, filename) or None
    if topology is not None:
        check_keys(topology, TOPOLOGY_KEYS, ("topology",), lines, filename)

    algorithm = data.get("algorithm")
    if algorithm is not None and algorithm not in ("sac", "ppo"):
        raise ConfigError(f"{filename}: algorithm must be 'sac' or 'ppo', got {algorithm!r}")

    train = _section(data, "train", lines, filename)
    if train:
        allowed = SAC_KEYS if algorithm == "sac" else PPO_KEYS if algorithm == "ppo" else ()
        if not allowed:
            raise ConfigError(f"{filename}: a 'train' section needs algorithm set to 'sac' or 'ppo'")
        check_keys(train, allowed, ("train",), lines, filename)

    eval_sec = _section(data, "eval", lines, filename) or None
    if eval_sec is not None:
        check_keys(eval_sec, EVAL_KEYS, ("eval",), lines, filename)

    regret = _section(data, "regret", lines, filename)
    check_keys(regret, REGRET_KEYS, ("regret",), lines, filename)

    bench = _section(data, "bench", lines, filename)
    check_keys(bench, BENCH_KEYS, ("bench",), lines, filename)

    seeds = data.get("seeds", [0])
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        raise ConfigError(f"{filename}: seeds must be a non-empty list of integers")

    mode = data.get("mode", "pipelined")
    if mode not in ("pipelined", "instantaneous"):
        raise ConfigError(f"{filename}: mode must be 'pipelined' or 'instantaneous', got {mode!r}")

    preset = data.get("preset", "desk")
    if preset not in ("paper", "desk"):
        raise ConfigError(f"{filename}: preset must be 'paper' or 'desk', got {preset!r}")

    eval_episodes = data.get("eval_episodes", 10)
    if not isinstance(eval_episodes, int) or eval_episodes < 1:
        raise ConfigError(f"{filename}: eval_episodes must be a positive integer")

    return ExperimentConfig(
        env=env,
        wrapper=wrapper,
        topology=topology,
        algorithm=algorithm,
        train=dict(train),
        seeds=tuple(seeds),
        out_dir=str(data.get("out_dir", "runs/experiment")),
        mode=mode,
        preset=preset,
        eval_episodes=eval_episodes,
        normalize_baseline=data.get("normalize_baseline"),
        eval=eval_sec,
        regret=dict(regret),
        bench=dict(bench),
    )


def build_env_factory(env_cfg: dict, wrapper_cfg: dict | None):
    """make_env(seed) closing over the env section and optional delay wrapper."""
    kwargs = {k: v for k, v in env_cfg.items() if k != "name"}
    cls = ENV_CLASSES[env_cfg["name"]]
    wrapper_kwargs = dict(wrapper_cfg) if wrapper_cfg else None
    if wrapper_kwargs is not None and "fixed_action" in wrapper_kwargs:
        fa = wrapper_kwargs["fixed_action"]
        wrapper_kwargs["fixed_action"] = None if fa is None else fa

    def make(seed: int):
        env = cls(**kwargs, seed=seed)
        if wrapper_kwargs is not None:
            env = delayed_wrap(env, seed=seed, **wrapper_kwargs)
        return env

    return make


def build_train_config(algorithm: str, train: dict, preset: str):
    """Overlay the train section on top of the named preset."""
    cls = SacConfig if algorithm == "sac" else PpoConfig
    train = {k: tuple(v) if isinstance(v, list) else v for k, v in train.items()}
    try:
        cfg = cls.paper(**train) if preset == "paper" else cls.desk(**train)
    except TypeError as exc:
        raise ConfigError(f"bad train option: {exc}") from exc
    cfg.validate()
    return cfg
