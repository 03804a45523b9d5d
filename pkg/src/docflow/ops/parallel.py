"""Ordered parallel map: compute up to `width` items ahead, emit in order."""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_parallel_map(items: Iterable[T], fn: Callable[[T], R], width: int) -> Iterator[R]:
    if width <= 1:
        for item in items:
            yield fn(item)
        return

    with ThreadPoolExecutor(max_workers=width) as pool:
        pending: deque = deque()
        iterator = iter(items)
        try:
            for item in iterator:
                pending.append(pool.submit(fn, item))
                if len(pending) >= width:
                    yield pending.popleft().result()
            while pending:
                yield pending.popleft().result()
        finally:
            for f in pending:
                f.cancel()
