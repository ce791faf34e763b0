"""Process-pool fan-out over a shared read-only object."""

from __future__ import annotations

import multiprocessing as mp
import os

_STATE: dict = {}


def _init(fn, shared):
    _STATE["fn"] = fn
    _STATE["shared"] = shared


def _run(task):
    return _STATE["fn"](_STATE["shared"], task)


def default_workers() -> int:
    env = os.environ.get("TKGRULES_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_tasks(fn, shared, tasks, workers: int = 1, chunksize: int | None = None) -> list:
    """``[fn(shared, t) for t in tasks]``, optionally spread over ``workers`` processes.

    Output order always follows ``tasks``.  With the fork start method the
    shared object is inherited by the workers instead of being pickled.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(shared, t) for t in tasks]
    method = "fork" if "fork" in mp.get_all_start_methods() else None
    ctx = mp.get_context(method)
    if chunksize is None:
        chunksize = max(1, len(tasks) // (workers * 8))
    with ctx.Pool(min(workers, len(tasks)), initializer=_init, initargs=(fn, shared)) as pool:
        return pool.map(_run, tasks, chunksize=chunksize)
