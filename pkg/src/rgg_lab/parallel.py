"""Ordered execution of independent seeded trials."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, TypeVar

T = TypeVar("T")

JOBS_ENV = "RGG_LAB_JOBS"


def resolve_jobs(jobs: Optional[int] = None) -> int:
    """Worker count: explicit value, else ``$RGG_LAB_JOBS``, else CPU count."""
    if jobs is None:
        env = os.environ.get(JOBS_ENV, "").strip()
        if env:
            try:
                jobs = int(env)
            except ValueError:
                raise ValueError(f"{JOBS_ENV} must be an integer, got {env!r}") from None
        else:
            jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    return jobs


def run_trials(fn: Callable[[int, int], T], seed: int, trials: int,
               jobs: Optional[int] = None) -> list[T]:
    """``[fn(seed, t) for t in range(trials)]``, possibly across processes.

    ``fn`` must be picklable when ``jobs > 1`` (a module-level function or a
    :func:`functools.partial` of one). Results always come back in trial
    order, so any reduction over them is schedule independent.
    """
    jobs = min(resolve_jobs(jobs), max(1, trials))
    if jobs == 1:
        return [fn(seed, t) for t in range(trials)]
    chunk = max(1, trials // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, [seed] * trials, range(trials), chunksize=chunk))
