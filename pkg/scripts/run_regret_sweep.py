"""Monte Carlo delay/inaction regret sweep on the hard chain MDP.

Defaults match the analysis grid: p=0.8, several chain sizes, action
repeats and observation delays 1..3.
"""

import argparse
import os

from rtrl.cli.main import plot_regret
from rtrl.regret.sweep import SweepSpec, run_sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ps", default="0.8")
    ap.add_argument("--n-states", default="8,16,64")
    ap.add_argument("--deltas", default="1,2,3,4")
    ap.add_argument("--delays", default="1,2,3")
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--rollouts", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/regret")
    args = ap.parse_args()

    spec = SweepSpec(
        ps=tuple(float(p) for p in args.ps.split(",")),
        n_states=tuple(int(n) for n in args.n_states.split(",")),
        deltas=tuple(int(d) for d in args.deltas.split(",")),
        delays=tuple(int(d) for d in args.delays.split(",")),
        steps=args.steps,
        rollouts=args.rollouts,
        seed=args.seed,
    )
    rows = run_sweep(spec)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "regret.csv")
    write_sweep_csv(csv_path, rows)
    plot_regret(csv_path, os.path.join(args.out, "regret.png"))
    for r in rows:
        print(f"p={r['p']} n={r['n_states']:>3d} delta={r['delta']} N={r['N']}: "
              f"delay {r['delay_regret']:.4f}  inaction {r['inaction_regret']:.4f} "
              f"(ci {r['ci']:.4f})")


if __name__ == "__main__":
    main()
