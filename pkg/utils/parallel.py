"""Chunked parallel evaluation with ordered or free-order reduction."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

# Fixed partition so deterministic reductions do not depend on the worker count
CHUNK_COUNT = 64

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(threads: Optional[int]) -> int:
    """0 or None means one worker per CPU."""
    if not threads:
        return os.cpu_count() or 1
    return max(1, int(threads))


def map_chunks(func: Callable[[T], R], chunks: Sequence[T], threads: Optional[int] = 1,
               deterministic: bool = True,
               progress_callback: Optional[Callable[[int, int], None]] = None) -> List[R]:
    """Evaluate ``func`` on every chunk.

    In deterministic mode results come back in chunk order; otherwise in
    completion order.
    """
    workers = min(resolve_workers(threads), max(1, len(chunks)))
    if workers == 1:
        results = []
        for done, chunk in enumerate(chunks, start=1):
            results.append(func(chunk))
            if progress_callback:
                progress_callback(done, len(chunks))
        return results

    results: List[R] = [None] * len(chunks)
    completion: List[R] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(func, chunk): i for i, chunk in enumerate(chunks)}
        for done, future in enumerate(as_completed(future_to_index), start=1):
            result = future.result()
            results[future_to_index[future]] = result
            completion.append(result)
            if progress_callback:
                progress_callback(done, len(chunks))
    return results if deterministic else completion


def reduce_chunks(func: Callable[[T], float], chunks: Sequence[T], threads: Optional[int] = 1,
                  deterministic: bool = True) -> float:
    """Sum of ``func`` over chunks; bit-stable in deterministic mode."""
    values = map_chunks(func, chunks, threads, deterministic)
    return float(np.sum(np.asarray(values, dtype=float))) if values else 0.0


def split_range(start: int, stop: int, n_chunks: int) -> List[range]:
    """Partition [start, stop) into at most n_chunks contiguous ranges."""
    n_chunks = max(1, min(n_chunks, stop - start))
    edges = np.linspace(start, stop, n_chunks + 1).round().astype(int)
    return [range(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
