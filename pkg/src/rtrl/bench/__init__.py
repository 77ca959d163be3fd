from .executors import (
    EXECUTOR_NAMES,
    FusedBlockDiagExecutor,
    PipelinedThreadExecutor,
    SequentialExecutor,
    build_executor,
    make_weights,
)
from .harness import (
    BENCH_COLUMNS,
    BenchConfig,
    BenchRow,
    correctness_gate,
    plot_bench,
    read_bench_csv,
    run_bench,
    sequential_latency_spearman,
    write_bench_csv,
)

__all__ = [
    "BENCH_COLUMNS",
    "BenchConfig",
    "BenchRow",
    "EXECUTOR_NAMES",
    "FusedBlockDiagExecutor",
    "PipelinedThreadExecutor",
    "SequentialExecutor",
    "build_executor",
    "correctness_gate",
    "make_weights",
    "plot_bench",
    "read_bench_csv",
    "run_bench",
    "sequential_latency_spearman",
    "write_bench_csv",
]
