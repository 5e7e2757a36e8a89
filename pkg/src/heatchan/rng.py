"""Deterministic random-stream derivation for parallel Monte Carlo.

Every stochastic routine keys its draws off a ``numpy.random.SeedSequence``
derived from the caller's seed plus a fixed integer path (stream tag, trial
index, chunk index, ...).  The derivation is stateless, so serial and
parallel executions of the same experiment consume identical draws no matter
how trials are partitioned across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["as_seedseq", "child", "rng_from", "run_indexed"]


def as_seedseq(seed) -> np.random.SeedSequence:
    """Coerce an int or SeedSequence into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        return np.random.SeedSequence(int(seed))
    raise TypeError(f"seed must be an int or SeedSequence, got {type(seed).__name__}")


def child(ss: np.random.SeedSequence, *path: int) -> np.random.SeedSequence:
    """Stateless spawn: the child stream at `path` below `ss`."""
    key = tuple(ss.spawn_key) + tuple(int(p) for p in path)
    return np.random.SeedSequence(entropy=ss.entropy, spawn_key=key)


def rng_from(seed, *path: int) -> np.random.Generator:
    """Generator for the stream at `path` below `seed`."""
    ss = as_seedseq(seed)
    if path:
        ss = child(ss, *path)
    return np.random.default_rng(ss)


def run_indexed(n_items: int, fn, workers: int = 1) -> list:
    """Evaluate ``[fn(0), ..., fn(n_items-1)]``, optionally across processes.

    Results are returned in index order, so any worker count yields the same
    list as a serial run provided `fn` derives its randomness from the index.
    """
    if n_items == 0:
        return []
    if workers is None:
        workers = 1
    workers = max(1, min(int(workers), n_items))
    if workers == 1:
        return [fn(i) for i in range(n_items)]
    import multiprocessing

    ctx = multiprocessing.get_context("fork")
    chunksize = max(1, n_items // (workers * 4))
    with ctx.Pool(workers) as pool:
        return pool.map(fn, range(n_items), chunksize=chunksize)
