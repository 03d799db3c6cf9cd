"""Deterministic chunked random streams.

Work is split into fixed-size chunks, each driven by its own child of
``SeedSequence(seed)``. Results depend only on ``(seed, chunk_size)``,
never on how many workers process the chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_CHUNK = 1 << 16


def chunk_bounds(total: int, chunk_size: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    if total < 0:
        raise ValueError("total must be nonnegative")
    return [(lo, min(lo + chunk_size, total)) for lo in range(0, total, chunk_size)]


def map_chunks(fn: Callable[[np.random.Generator, int], T], seed: int, total: int,
               chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> list[T]:
    """Call ``fn(rng, n)`` for every chunk and return results in chunk order."""
    bounds = chunk_bounds(total, chunk_size)
    children = np.random.SeedSequence(seed).spawn(len(bounds))
    jobs = [(np.random.default_rng(ss), hi - lo) for ss, (lo, hi) in zip(children, bounds)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(rng, n) for rng, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def uniform_sphere(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` points uniform on the unit sphere in ``R^d``."""
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
