"""Timing harness: correctness gate first, then median-of-runs throughput.

No timing row is ever emitted for a depth whose executors disagree on a
shared random input stream.  On machines without real hardware
parallelism the pipelined executor mostly measures barrier overhead;
the numbers are reported as measured.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..numerics.rng import RngStream
from .executors import EXECUTOR_NAMES, PipelinedThreadExecutor, build_executor, make_weights

__all__ = [
    "BENCH_COLUMNS",
    "BenchConfig",
    "BenchRow",
    "correctness_gate",
    "run_bench",
    "sequential_latency_spearman",
    "write_bench_csv",
    "read_bench_csv",
    "plot_bench",
]

BENCH_COLUMNS = ("executor", "depth", "actions_per_sec", "latency_per_action", "speedup_vs_sequential")


@dataclass(frozen=True)
class BenchConfig:
    depths: tuple = (1, 2, 4, 8, 16)
    width: int = 256
    batch_size: int = 64
    warmup_iters: int = 10
    timed_iters: int = 100
    runs: int = 5
    threads: int = 4
    executors: tuple = EXECUTOR_NAMES

    def validate(self) -> None:
        if not self.depths or any(d < 1 for d in self.depths):
            raise ValueError("depths must be positive")
        if self.width < 1 or self.batch_size < 1:
            raise ValueError("width and batch_size must be positive")
        if self.warmup_iters < 10:
            raise ValueError("warmup_iters must be at least 10")
        if self.timed_iters < 100:
            raise ValueError("timed_iters must be at least 100")
        if self.runs < 1:
            raise ValueError("runs must be positive")
        unknown = set(self.executors) - set(EXECUTOR_NAMES)
        if unknown:
            raise ValueError(f"unknown executors {sorted(unknown)}; choose from {EXECUTOR_NAMES}")
        if "pipelined_threads" in self.executors and self.threads < 2:
            raise ValueError("pipelined_threads needs a thread count of at least 2")


@dataclass(frozen=True)
class BenchRow:
    executor: str
    depth: int
    actions_per_sec: float
    latency_per_action: float
    speedup_vs_sequential: float


def correctness_gate(executors: dict, obs_stream: np.ndarray, tol: float = 1e-6) -> None:
    """Compare every executor's stream against the sequential reference.

    Executors whose ``shift`` is d must reproduce the sequential output d
    ticks late (their first d outputs are the zero-state transient and are
    skipped).  Raises RuntimeError on any mismatch: no timings without it.
    """
    if "sequential" not in executors:
        raise ValueError("the gate needs the sequential executor as reference")
    ref = executors["sequential"].run(obs_stream)
    T = obs_stream.shape[0]
    for name, ex in executors.items():
        if name == "sequential":
            continue
        out = ex.run(obs_stream)
        shift = ex.shift
        if T <= shift:
            raise ValueError(f"stream of {T} ticks cannot cover a shift of {shift}")
        err = float(np.max(np.abs(out[shift:] - ref[: T - shift])))
        if not err <= tol:
            raise RuntimeError(
                f"correctness gate failed: {name} deviates from sequential by {err:.3e} "
                f"(tolerance {tol:.1e}); refusing to report timings"
            )


def _time_once(ex, obs: np.ndarray, warmup: int, timed: int) -> float:
    ex.reset(obs.shape[0])
    for _ in range(warmup):
        ex.tick(obs)
    t0 = time.perf_counter()
    for _ in range(timed):
        ex.tick(obs)
    return time.perf_counter() - t0


def _median_latency(ex, obs: np.ndarray, cfg: BenchConfig) -> float:
    """Median over runs of seconds per tick."""
    samples = [_time_once(ex, obs, cfg.warmup_iters, cfg.timed_iters) for _ in range(cfg.runs)]
    if isinstance(ex, PipelinedThreadExecutor):
        ex.stop()
    return statistics.median(samples) / cfg.timed_iters


def run_bench(cfg: BenchConfig, seed: int = 0) -> list[BenchRow]:
    cfg.validate()
    rng = RngStream(seed).substream("bench")
    rows = []
    for depth in cfg.depths:
        weights = make_weights(depth, cfg.width, rng.substream(f"weights-{depth}"))
        executors = {name: build_executor(name, weights) for name in EXECUTOR_NAMES}
        gate_stream = rng.substream(f"gate-{depth}").normal(size=(depth + 8, 4, cfg.width))
        correctness_gate(executors, gate_stream)

        obs = rng.substream(f"obs-{depth}").normal(size=(cfg.batch_size, cfg.width))
        latency = {name: _median_latency(executors[name], obs, cfg) for name in EXECUTOR_NAMES}
        for name in cfg.executors:
            rows.append(
                BenchRow(
                    executor=name,
                    depth=depth,
                    actions_per_sec=cfg.batch_size / latency[name],
                    latency_per_action=latency[name],
                    speedup_vs_sequential=latency["sequential"] / latency[name],
                )
            )
    return rows


def sequential_latency_spearman(rows: list[BenchRow]) -> float:
    """Spearman correlation between depth and sequential latency per action."""
    seq = sorted((r for r in rows if r.executor == "sequential"), key=lambda r: r.depth)
    if len(seq) < 3:
        raise ValueError("need at least three sequential depths for a rank correlation")
    rho, _ = stats.spearmanr([r.depth for r in seq], [r.latency_per_action for r in seq])
    return float(rho)


def write_bench_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_COLUMNS)
        for r in rows:
            writer.writerow(
                [r.executor, r.depth, repr(r.actions_per_sec), repr(r.latency_per_action),
                 repr(r.speedup_vs_sequential)]
            )


def read_bench_csv(path) -> list[BenchRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != BENCH_COLUMNS:
            raise ValueError(f"unexpected columns {header}; expected {BENCH_COLUMNS}")
        return [
            BenchRow(row[0], int(row[1]), float(row[2]), float(row[3]), float(row[4]))
            for row in reader
        ]


def plot_bench(csv_path, out_path) -> None:
    """Throughput vs depth per executor; the CSV is the source of truth."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_bench_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in EXECUTOR_NAMES:
        sub = sorted((r for r in rows if r.executor == name), key=lambda r: r.depth)
        if sub:
            ax.plot([r.depth for r in sub], [r.actions_per_sec for r in sub], marker="o", label=name)
    ax.set_xlabel("depth (stages)")
    ax.set_ylabel("actions / second")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
