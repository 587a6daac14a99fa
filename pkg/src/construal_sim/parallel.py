"""Order-preserving map over independent tasks.

Parallelism is capped by ``CONSTRUAL_SIM_THREADS`` (default 1). Every task
derives its own random stream from its arguments, so results never depend on
the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_VAR = "CONSTRUAL_SIM_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _call(packed):
    fn, args = packed
    return fn(*args)


def pmap(fn, arg_tuples, workers: int | None = None) -> list:
    """``[fn(*args) for args in arg_tuples]``, possibly across processes."""
    arg_tuples = list(arg_tuples)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(arg_tuples) < 2:
        return [fn(*a) for a in arg_tuples]
    chunk = max(1, len(arg_tuples) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_call, [(fn, a) for a in arg_tuples], chunksize=chunk))
