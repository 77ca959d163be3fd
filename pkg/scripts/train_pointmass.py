"""Point-mass comparison under observation delay: skip connections +
history augmentation against a plain delayed network, trained with SAC.
"""

import argparse
import csv
import os

import numpy as np

from rtrl.envs import PointMassEnv, delayed_wrap
from rtrl.pipeline import build_topology
from rtrl.rl import Agent, SacConfig, evaluate, train_sac

ARMS = ("vanilla_delayed", "skip_aug")


def make_env_factory(args, augmented):
    def make(seed):
        env = PointMassEnv(dim=args.dim, seed=seed)
        kwargs = {"past_obs": args.delay, "past_actions": args.delay} if augmented else {}
        return delayed_wrap(env, seed=seed, delay=args.delay, **kwargs)
    return make


def run_arm(arm, args, seeds):
    make_env = make_env_factory(args, augmented=arm == "skip_aug")
    spec = make_env(seeds[0]).spec
    variant = "all_skips" if arm == "skip_aug" else "vanilla"
    topology = build_topology(variant, depth=args.depth, obs_dim=spec.obs_dim,
                              hidden_dim=args.hidden,
                              out_dim=2 * spec.action_space.dim)
    cfg = SacConfig.desk(total_steps=args.steps)
    finals = []
    for seed in seeds:
        result = train_sac(make_env, topology, cfg, seed)
        agent = Agent(topology, result.actor_params, "gaussian")
        report = evaluate(agent, make_env, episodes=args.eval_episodes, seed=seed)
        finals.append(report.mean_return)
        print(f"  {arm} seed {seed}: {report.mean_return:.3f}")
    return finals


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--delay", type=int, default=2)
    ap.add_argument("--depth", type=int, default=2)
    ap.add_argument("--hidden", type=int, default=64)
    ap.add_argument("--eval-episodes", type=int, default=10)
    ap.add_argument("--out", default="runs/pointmass")
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
