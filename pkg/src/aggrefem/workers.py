# -*- coding: utf-8 -*-

"""
Worker-count handling for the numba thread pool.
"""
import logging
import os

from contextlib import contextmanager
from typing import Iterator
from typing import Optional

import numba

from .exceptions import ConfigError

ENV_THREADS = 'AGGREFEM_NUM_THREADS'

log = logging.getLogger('aggrefem.workers')


def max_workers() -> int:
    """Size of the numba thread pool, fixed at import time"""
    return int(numba.config.NUMBA_NUM_THREADS)


def resolve_workers(requested: Optional[int] = None, configured: Optional[int] = None) -> int:
    """
    Pick the worker count.

    Precedence: explicit request (command line), then the
    AGGREFEM_NUM_THREADS environment variable, then the configured value,
    then the whole numba pool. The result is clamped to [1, max_workers()].
    """
    env = os.environ.get(ENV_THREADS)
    if env is not None and not env.strip():
        env = None

    if requested is not None:
        chosen = requested
    elif env is not None:
        try:
            chosen = int(env)
        except ValueError:
            raise ConfigError(f"{ENV_THREADS}: expected an integer, got {env!r}") from None
    elif configured is not None:
        chosen = configured
    else:
        chosen = max_workers()

    if chosen < 1:
        raise ConfigError(f"worker count must be >= 1, got {chosen}")
    if chosen > max_workers():
        log.info("clamping %d workers to the numba pool size %d", chosen, max_workers())
        chosen = max_workers()
    return int(chosen)


@contextmanager
def worker_threads(count: Optional[int]) -> Iterator[int]:
    """Run the enclosed block with `count` numba threads, restoring the previous setting"""
    previous = numba.get_num_threads()
    if count is None:
        yield previous
        return

    count = min(max(int(count), 1), max_workers())
    numba.set_num_threads(count)
    try:
        yield count
    finally:
        numba.set_num_threads(previous)
