"""Helper functions for working with threads."""

from concurrent.futures import ThreadPoolExecutor
import os

THREADS_ENV = "SEPCA_THREADS"


def resolve_thread_count(threads: int | None = None) -> int:
    """--threads, then SEPCA_THREADS, then the number of cores."""
    if threads is not None and threads > 0:
        return int(threads)
    from_env = os.environ.get(THREADS_ENV, "").strip()
    if from_env.isdigit() and int(from_env) > 0:
        return int(from_env)
    return os.cpu_count() or 1


def map_on_threads(function, items, threads: int | None = None) -> list:
    """Apply ``function`` to every item on a bounded pool, results in input order."""
    items = list(items)
    workers = min(resolve_thread_count(threads), max(len(items), 1))
    if workers <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, items))
