"""Worker pool for randomized batteries, capped by ``GH_FORGE_THREADS``."""

import logging
import os
from typing import Callable, Optional, TypeVar

import numpy as np
from joblib import Parallel, delayed
from joblib.parallel import cpu_count

logger = logging.getLogger(__name__)

THREADS_ENV = "GH_FORGE_THREADS"

T = TypeVar("T")


def worker_count(default: Optional[int] = None) -> int:
    """
    Number of worker threads.

    Raises:
        ValueError: If ``GH_FORGE_THREADS`` is set to anything but a positive integer.
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return default or cpu_count()
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def spawn_generators(seed: int, count: int) -> list[np.random.Generator]:
    """One independent stream per task; stream ``k`` depends only on ``seed`` and ``k``."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def seeded_map(function: Callable[[np.random.Generator], T], count: int, seed: int) -> list[T]:
    """
    Run ``function`` once per task with its own generator, results in task order.

    Results do not depend on the number of workers.
    """
    generators = spawn_generators(seed, count)
    n_jobs = min(worker_count(), max(count, 1))
    if n_jobs == 1:
        return [function(rng) for rng in generators]
    logger.debug("Running %d seeded tasks on %d threads", count, n_jobs)
    return Parallel(n_jobs=n_jobs, backend="threading")(delayed(function)(rng) for rng in generators)


def parallel_map(function: Callable[..., T], inputs: list, n_jobs: Optional[int] = None) -> list[T]:
    """Apply ``function`` to every input on the worker pool, results in input order."""
    n_jobs = min(n_jobs or worker_count(), max(len(inputs), 1))
    if n_jobs == 1:
        return [function(item) for item in inputs]
    return Parallel(n_jobs=n_jobs, backend="threading")(delayed(function)(item) for item in inputs)
