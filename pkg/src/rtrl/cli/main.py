"""Command line front end: train, eval, regret and bench subcommands."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys

import numpy as np
import yaml

from ..bench.harness import BenchConfig, plot_bench, run_bench, write_bench_csv
from ..pipeline import build_topology
from ..regret.sweep import SweepSpec, run_sweep, write_sweep_csv
from ..rl import Agent, evaluate, load_agent, save_agent, train_ppo, train_sac
from .configio import ConfigError
from .experiment import ExperimentConfig, build_env_factory, build_train_config, load_experiment

__all__ = ["main"]


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


def _echo_config(cfg: ExperimentConfig) -> None:
    """Resolved config into the output directory; rerunnable as-is."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "config.yaml"), "w") as fh:
        yaml.safe_dump(cfg.resolved(), fh, sort_keys=True)


def _head_geometry(cfg: ExperimentConfig, spec):
    space = spec.action_space
    if cfg.algorithm == "sac":
        if not hasattr(space, "dim"):
            raise ConfigError("sac needs a continuous action space")
        return 2 * space.dim, "gaussian"
    if not hasattr(space, "n"):
        raise ConfigError("ppo needs a discrete action space")
    return space.n, "categorical"


def _baseline_mean(path: str) -> float:
    if os.path.isdir(path):
        path = os.path.join(path, "aggregate.csv")
    with open(path, newline="") as fh:
        row = next(csv.DictReader(fh))
    return float(row["mean_return"])


def cmd_train(cfg: ExperimentConfig) -> int:
    cfg.require("env", "topology", "algorithm")
    if cfg.algorithm == "sac" and cfg.mode == "instantaneous":
        raise ConfigError("instantaneous training is only supported for ppo")
    make_env = build_env_factory(cfg.env, cfg.wrapper)
    spec = make_env(cfg.seeds[0]).spec
    out_dim, kind = _head_geometry(cfg, spec)
    topo_cfg = dict(cfg.topology)
    topology = build_topology(
        variant=topo_cfg.get("variant", "vanilla"),
        depth=topo_cfg.get("depth", 2),
        obs_dim=spec.obs_dim,
        hidden_dim=topo_cfg.get("hidden_dim", 64),
        out_dim=out_dim,
        exec_time=topo_cfg.get("exec_time", 1),
    )
    train_cfg = build_train_config(cfg.algorithm, cfg.train, cfg.preset)

    _echo_config(cfg)
    finals = []
    for seed in cfg.seeds:
        seed_dir = os.path.join(cfg.out_dir, f"seed{seed}")
        os.makedirs(seed_dir, exist_ok=True)
        metrics_path = os.path.join(seed_dir, "metrics.csv")
        if cfg.algorithm == "sac":
            result = train_sac(make_env, topology, train_cfg, seed, metrics_path=metrics_path)
        else:
            result = train_ppo(
                make_env, topology, train_cfg, seed,
                metrics_path=metrics_path,
                instantaneous=cfg.mode == "instantaneous",
            )
        agent = Agent(topology, result.actor_params, kind, mode=cfg.mode)
        save_agent(os.path.join(seed_dir, "agent.json"), agent,
                   config={"algorithm": cfg.algorithm, "seed": seed})
        report = evaluate(agent, make_env, episodes=cfg.eval_episodes, seed=seed, deterministic=True)
        finals.append((seed, report.mean_return))
        print(f"seed {seed}: final_return {report.mean_return:.6g} over {cfg.eval_episodes} episodes")

    _write_csv(os.path.join(cfg.out_dir, "returns.csv"), ("seed", "final_return"),
               [(seed, _fmt(r)) for seed, r in finals])
    values = np.array([r for _, r in finals], dtype=np.float64)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    header = ["n_seeds", "mean_return", "se_return"]
    row = [len(values), _fmt(mean), _fmt(se)]
    if cfg.normalize_baseline:
        base = _baseline_mean(cfg.normalize_baseline)
        header += ["normalized_mean", "normalized_se"]
        row += [_fmt(mean / base), _fmt(se / abs(base))]
    _write_csv(os.path.join(cfg.out_dir, "aggregate.csv"), header, [row])
    print(f"aggregate: mean_return {mean:.6g} se {se:.6g} ({len(values)} seeds)")
    return 0


def cmd_eval(cfg: ExperimentConfig) -> int:
    cfg.require("env", "eval")
    checkpoint = cfg.eval.get("checkpoint")
    if not checkpoint:
        raise ConfigError("eval section needs a 'checkpoint' path")
    agent = load_agent(checkpoint)
    make_env = build_env_factory(cfg.env, cfg.wrapper)
    report = evaluate(
        agent,
        make_env,
        episodes=int(cfg.eval.get("episodes", cfg.eval_episodes)),
        seed=cfg.seeds[0],
        deterministic=bool(cfg.eval.get("deterministic", True)),
        dropout_p=float(cfg.eval.get("dropout_p", 0.0)),
    )
    _echo_config(cfg)
    _write_csv(os.path.join(cfg.out_dir, "eval.csv"), ("episode", "return"),
               [(i, _fmt(r)) for i, r in enumerate(report.returns)])
    print(f"episodes={report.episodes} mean_return={report.mean_return:.6g} "
          f"mean_length={report.mean_length:.6g}")
    return 0


def plot_regret(csv_path, out_path) -> None:
    """Per-step regret curves rebuilt from the sweep CSV alone."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    fig, (ax_d, ax_i) = plt.subplots(1, 2, figsize=(9, 3.5))
    by_delay: dict = {}
    by_delta: dict = {}
    for r in rows:
        by_delay.setdefault(int(r["N"]), []).append(float(r["delay_regret"]))
        by_delta.setdefault(int(r["delta"]), []).append(float(r["inaction_regret"]))
    for ax, table, xlabel, ylabel in (
        (ax_d, by_delay, "observation delay", "delay regret / step"),
        (ax_i, by_delta, "action repeat", "inaction regret / step"),
    ):
        xs = sorted(table)
        ax.plot(xs, [float(np.mean(table[x])) for x in xs], marker="o")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def cmd_regret(cfg: ExperimentConfig) -> int:
    spec = SweepSpec(**{
        k: tuple(v) if isinstance(v, list) else v for k, v in cfg.regret.items()
    })
    rows = run_sweep(spec)
    _echo_config(cfg)
    csv_path = os.path.join(cfg.out_dir, "regret.csv")
    write_sweep_csv(csv_path, rows)
    plot_regret(csv_path, os.path.join(cfg.out_dir, "regret.png"))
    print(f"wrote {len(rows)} sweep rows to {csv_path}")
    return 0


def cmd_bench(cfg: ExperimentConfig) -> int:
    fields = {f.name for f in dataclasses.fields(BenchConfig)}
    kwargs = {k: tuple(v) if isinstance(v, list) else v
              for k, v in cfg.bench.items() if k in fields}
    bcfg = BenchConfig(**kwargs)
    try:
        bcfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = run_bench(bcfg, seed=cfg.seeds[0])
    _echo_config(cfg)
    csv_path = os.path.join(cfg.out_dir, "bench.csv")
    write_bench_csv(rows, csv_path)
    plot_bench(csv_path, os.path.join(cfg.out_dir, "bench.png"))
    print(f"wrote {len(rows)} bench rows to {csv_path}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtrl")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("train", "eval", "regret", "bench"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment YAML file")
        p.add_argument("--out", default=None, help="override out_dir from the config")
    train = sub.choices["train"]
    train.add_argument("--seed-override", default=None,
                       help="comma separated seeds replacing the config list")
    train.add_argument("--preset", choices=("paper", "desk"), default=None,
                       help="base hyperparameters the train section overlays")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_experiment(args.config)
        if args.out:
            cfg = dataclasses.replace(cfg, out_dir=args.out)
        if args.command == "train":
            if args.seed_override:
                try:
                    seeds = tuple(int(s) for s in args.seed_override.split(","))
                except ValueError:
                    raise ConfigError(f"--seed-override must be comma separated integers, "
                                      f"got {args.seed_override!r}") from None
                cfg = dataclasses.replace(cfg, seeds=seeds)
            if args.preset:
                cfg = dataclasses.replace(cfg, preset=args.preset)
            return cmd_train(cfg)
        if args.command == "eval":
            return cmd_eval(cfg)
        if args.command == "regret":
            return cmd_regret(cfg)
        return cmd_bench(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
