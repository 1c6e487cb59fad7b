import time
import logging
import multiprocessing
from functools import wraps
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional

logger = logging.getLogger(__name__)


def timing_decorator(func):
    """Decorator to measure execution time of functions."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        end_time = time.perf_counter()
        logger.debug(
            f"Function {func.__name__} took {end_time - start_time:.2f} seconds to execute"
        )
        return result

    return wrapper


def parallel_map(
    process_func: Callable,
    items: Iterable,
    max_workers: Optional[int] = None,
    chunk_size: int = 64,
) -> List:
    """Apply ``process_func`` to every item on a thread pool.

    Results come back in input order whatever the completion order, so callers
    get deterministic output. numpy releases the GIL inside its kernels, which
    is where the work goes.
    """
    items = list(items)
    if not items:
        return []
    if max_workers is None:
        max_workers = max(1, multiprocessing.cpu_count() - 1)
    if max_workers == 1 or len(items) <= chunk_size:
        return [process_func(item) for item in items]

    chunks = [items[i : i + chunk_size] for i in range(0, len(items), chunk_size)]

    def run_chunk(chunk):
        return [process_func(item) for item in chunk]

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        results = []
        for chunk_result in executor.map(run_chunk, chunks):
            results.extend(chunk_result)
    return results
