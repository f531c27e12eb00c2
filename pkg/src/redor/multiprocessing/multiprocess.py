"""Parallel execution of independent, deterministic jobs using multiprocessing."""

import multiprocessing
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any

from redor.core.config import RuntimeSettings
from redor.core.redor_error import RedorError


def get_available_cores() -> int:
    """Get the number of available CPU cores."""
    return multiprocessing.cpu_count()


def resolve_worker_count(task_count: int, max_workers: int | None = None) -> int:
    """Number of workers for ``task_count`` jobs.

    The cap is ``max_workers`` when given, else ``REDOR_THREADS`` (0 means no cap).
    """
    cap = max_workers if max_workers is not None else RuntimeSettings().threads
    workers = min(get_available_cores(), task_count)
    if cap > 0:
        workers = min(workers, cap)
    return max(workers, 1)


def run_functions_in_parallel(
    tasks: list[tuple[Callable[..., Any], list[Any]]],
    max_workers: int | None = None,
) -> list[Any]:
    """Run a list of functions in parallel using multiprocessing.

    Args:
        tasks: List of (function, arguments) pairs; arguments are unpacked with *args.
            Functions must be picklable (module-level).
        max_workers: Optional worker cap; see `resolve_worker_count`.

    Returns:
        List of results from each function, in the same order as the input tasks.

    Raises:
        RedorError: Wraps the first failing task's exception, naming its index.

    Example:
        >>> def add(a, b):
        ...     return a + b
        >>> run_functions_in_parallel([(add, [1, 2]), (add, [3, 4])])
        [3, 7]
    """
    if len(tasks) == 0:
        return []

    results: list[Any] = [None] * len(tasks)
    workers = resolve_worker_count(len(tasks), max_workers)
    if workers == 1:
        for idx, (func, args) in enumerate(tasks):
            try:
                results[idx] = func(*args)
            except Exception as e:
                raise RedorError(f"Task at index {idx} failed with error: {e}") from e
        return results

    with ProcessPoolExecutor(max_workers=workers) as executor:
        future_to_index = {
            executor.submit(func, *args): idx for idx, (func, args) in enumerate(tasks)
        }
        for future in as_completed(future_to_index):
            idx = future_to_index[future]
            try:
                results[idx] = future.result()
            except Exception as e:
                raise RedorError(f"Task at index {idx} failed with error: {e}") from e

    return results
