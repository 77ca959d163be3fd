"""Grid sweep over chain-env regret settings with a stable CSV format."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .measures import chain_env_factory, delay_regret, inaction_regret
from .policies import delayed_optimal, undelayed_optimal
from ..envs.worstcase import WorstCaseEnv

__all__ = ["SweepSpec", "run_sweep", "write_sweep_csv", "SWEEP_COLUMNS"]

SWEEP_COLUMNS = ("p", "n_states", "delta", "N", "policy", "t", "delay_regret", "inaction_regret", "ci")


@dataclass(frozen=True)
class SweepSpec:
    ps: tuple = (0.8,)
    n_states: tuple = (8,)
    deltas: tuple = (1, 2, 3)
    delays: tuple = (1, 2, 3)
    policies: tuple = ("fixed_action",)
    steps: int = 1000
    rollouts: int = 30
    seed: int = 0


def run_sweep(spec: SweepSpec) -> list[dict]:
    """One row per (p, n_states, delta, N, policy) combination.

    ``t`` is the scored step count per rollout (steps for the delay term,
    decisions for the inaction term); ``ci`` is the larger of the two 95%
    half-widths, so it is conservative for both columns.
    """
    rows = []
    for p in spec.ps:
        for n in spec.n_states:
            P = WorstCaseEnv(n, p).transition_matrix()
            make = chain_env_factory(n, p)
            for delta in spec.deltas:
                for delay in spec.delays:
                    for policy in spec.policies:
                        dr = delay_regret(
                            make,
                            delayed_optimal(P, delay),
                            undelayed_optimal(),
                            delay,
                            steps=spec.steps,
                            rollouts=spec.rollouts,
                            seed=spec.seed,
                        )
                        ir = inaction_regret(
                            make,
                            undelayed_optimal(),
                            policy,
                            delta,
                            decisions=spec.steps,
                            rollouts=spec.rollouts,
                            seed=spec.seed,
                            fixed_action=0 if policy == "fixed_action" else None,
                        )
                        rows.append(
                            {
                                "p": p,
                                "n_states": n,
                                "delta": delta,
                                "N": delay,
                                "policy": policy,
                                "t": spec.steps,
                                "delay_regret": dr.regret_per_step,
                                "inaction_regret": ir.regret_per_step,
                                "ci": max(dr.ci, ir.ci),
                            }
                        )
    return rows


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow(
                [
                    repr(float(row["p"])),
                    row["n_states"],
                    row["delta"],
                    row["N"],
                    row["policy"],
                    row["t"],
                    repr(float(row["delay_regret"])),
                    repr(float(row["inaction_regret"])),
                    repr(float(row["ci"])),
                ]
            )
