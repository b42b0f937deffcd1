"""Seed derivation and replication fan-out.

Every random draw in the package goes through :func:`rng_for`, which keys a
generator on ``(seed, *stream)``.  Replication ``i`` of an experiment always
receives the same stream no matter which worker runs it, so aggregates do not
depend on ``threads``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

# Stream tags keep unrelated consumers of the same user seed apart.
STREAM_NOISE = 1
STREAM_HAAR = 2
STREAM_JACOBI = 3
STREAM_GOE = 4
STREAM_REPLICATION = 5


def rng_for(seed: int | None, *stream: int) -> np.random.Generator:
    """Return a generator keyed on ``seed`` and the integer path ``stream``."""
    if seed is None:
        return np.random.default_rng()
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def sub_seed(seed: int, *stream: int) -> int:
    """Derive a 63-bit integer seed from ``seed`` and a counter path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return int(ss.generate_state(1, dtype=np.uint64)[0]) >> 1


def resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return int(threads)


def replicate(fn: Callable[[int], T], indices: Iterable[int], threads: int | None = 1,
              chunksize: int = 16) -> list[T]:
    """Evaluate ``fn(i)`` for every index, preserving index order.

    ``fn`` must be picklable when ``threads > 1``.  Results are identical for
    any worker count because each call derives its randomness from ``i``.
    """
    idx: Sequence[int] = list(indices)
    n = resolve_threads(threads)
    if n == 1 or len(idx) < 2:
        return [fn(i) for i in idx]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, idx, chunksize=chunksize))
