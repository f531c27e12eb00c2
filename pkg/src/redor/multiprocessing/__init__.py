"""Parallel execution utilities using multiprocessing."""

from redor.multiprocessing.multiprocess import (
    get_available_cores,
    resolve_worker_count,
    run_functions_in_parallel,
)

__all__ = [
    "get_available_cores",
    "resolve_worker_count",
    "run_functions_in_parallel",
]
