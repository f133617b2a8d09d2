"""Thread-pool helpers and deterministic random substreams."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "DISTREP_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Return the worker count: explicit value, else ``DISTREP_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Apply ``fn`` to every item, preserving input order in the result."""
    items = list(items)
    n_workers = min(resolve_threads(threads), max(len(items), 1))
    if n_workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for replicate ``index`` derived from the master ``seed``.

    The stream depends only on ``(seed, index)``, so replicates can be
    evaluated in any order or in parallel with identical results.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def chunked(n: int, n_chunks: int) -> Sequence[range]:
    """Split ``range(n)`` into at most ``n_chunks`` contiguous ranges."""
    n_chunks = max(1, min(n_chunks, n))
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
