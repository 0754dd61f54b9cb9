"""
Ordered Parallel Map.

Independent work items (fuzz cases, lemma kinds, bidegrees) run on a thread
pool; results always come back in submission order so reports stay
byte-identical across runs and worker counts.
"""

import logging
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, TypeVar

from deforge.constants import THREADS_ENV_VAR

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(configured: Optional[int] = None) -> int:
    """Worker count: the configured value (0 means CPU count), capped by DEFORGE_THREADS."""
    count = configured if configured and configured > 0 else (os.cpu_count() or 1)
    env_value = os.environ.get(THREADS_ENV_VAR)
    if not env_value:
        return count
    try:
        cap = int(env_value)
    except ValueError:
        logger.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={env_value!r}")
        return count
    if cap < 1:
        logger.warning(f"Ignoring non-positive {THREADS_ENV_VAR}={cap}")
        return count
    return min(count, cap)


def run_ordered(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> list[R]:
    """Apply ``fn`` to every item, returning results in input order.

    Exceptions raised by ``fn`` propagate from the first failing item in order.
    """
    items = list(items)
    count = resolve_workers(workers)
    if count == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Running {len(items)} items on {count} threads")
    with ThreadPoolExecutor(max_workers=count) as pool:
        futures = [pool.submit(fn, item) for item in items]
        return [f.result() for f in futures]
