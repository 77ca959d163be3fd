"""Door-key grid comparison: skip connections + history augmentation
against a plain delayed network and an undelayed upper baseline.

Each arm trains PPO over the same seed list, then reports the mean and
standard error of the final deterministic evaluation return.
"""

import argparse
import csv
import os

import numpy as np

from rtrl.envs import DoorKeyEnv, delayed_wrap
from rtrl.pipeline import build_topology
from rtrl.rl import Agent, PpoConfig, evaluate, train_ppo

ARMS = ("undelayed", "vanilla_delayed", "skip_aug")


def make_env_factory(size, delay, augmented):
    def make(seed):
        env = DoorKeyEnv(size=size, seed=seed)
        if delay == 0:
            return env
        kwargs = {"past_obs": delay, "past_actions": delay} if augmented else {}
        return delayed_wrap(env, seed=seed, delay=delay, **kwargs)
    return make


def run_arm(arm, args, seeds):
    delay = 0 if arm == "undelayed" else args.delay
    make_env = make_env_factory(args.size, delay, augmented=arm == "skip_aug")
    spec = make_env(seeds[0]).spec
    variant = "all_skips" if arm == "skip_aug" else "vanilla"
    topology = build_topology(variant, depth=args.depth, obs_dim=spec.obs_dim,
                              hidden_dim=args.hidden, out_dim=spec.action_space.n)
    cfg = PpoConfig.desk(total_steps=args.steps)
    finals = []
    for seed in seeds:
        result = train_ppo(make_env, topology, cfg, seed,
                           instantaneous=arm == "undelayed")
        mode = "instantaneous" if arm == "undelayed" else "pipelined"
        agent = Agent(topology, result.actor_params, "categorical", mode=mode)
        report = evaluate(agent, make_env, episodes=args.eval_episodes, seed=seed)
        finals.append(report.mean_return)
        print(f"  {arm} seed {seed}: {report.mean_return:.3f}")
    return finals


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--steps", type=int, default=40000)
    ap.add_argument("--size", type=int, default=5)
    ap.add_argument("--delay", type=int, default=1)
    ap.add_argument("--depth", type=int, default=2)
    ap.add_argument("--hidden", type=int, default=64)
    ap.add_argument("--eval-episodes", type=int, default=20)
    ap.add_argument("--out", default="runs/doorkey")
    args = ap.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]

    os.makedirs(args.out, exist_ok=True)
    summary = []
    for arm in ARMS:
        finals = run_arm(arm, args, seeds)
        mean = float(np.mean(finals))
        se = float(np.std(finals, ddof=1) / np.sqrt(len(finals))) if len(finals) > 1 else 0.0
        summary.append((arm, mean, se))
        print(f"{arm}: {mean:.3f} +- {se:.3f}")

    with open(os.path.join(args.out, "comparison.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("arm", "mean_return", "se_return"))
        for arm, mean, se in summary:
            w.writerow((arm, repr(mean), repr(se)))


if __name__ == "__main__":
    main()
