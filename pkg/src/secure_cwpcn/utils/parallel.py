"""
Order-preserving worker pool for per-state solves.

Results always come back in input order, so reductions over them do not
depend on the number of workers.
"""

import logging
from collections.abc import Iterator
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Any, Callable, Iterable, List

logger = logging.getLogger("secure-cwpcn.parallel")

MapFunction = Callable[[Callable[[Any], Any], Iterable[Any]], List[Any]]


@contextmanager
def worker_pool(workers: int = 1) -> Iterator[MapFunction]:
    """
    Yield a ``map``-like callable backed by processes when ``workers > 1``.

    Example:
        >>> with worker_pool(4) as pmap:
        ...     solutions = pmap(solve, states)
    """
    if workers <= 1:
        yield lambda fn, items: list(map(fn, items))
        return

    logger.debug(f"Starting process pool with {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:

        def pmap(fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
            items = list(items)
            chunksize = max(1, len(items) // (4 * workers))
            return list(executor.map(fn, items, chunksize=chunksize))

        yield pmap
