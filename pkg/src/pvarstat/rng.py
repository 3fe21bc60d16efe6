"""Deterministic random streams and a replicate-parallel map.

Philox is counter-based, so the stream for replicate ``r`` is a pure
function of ``(master_seed, r)``: results never depend on execution order
or on how many workers ran the study.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import ValidationError

GENERATOR_TAG = f"numpy.Philox/SeedSequence numpy=={np.__version__}"


def _seed_key(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        parts = (int(seed),)
    elif isinstance(seed, (tuple, list)):
        parts = tuple(int(s) for s in seed)
    else:
        raise ValidationError(f"seed must be an integer or a tuple of integers, got {seed!r}")
    if not parts or any(s < 0 for s in parts):
        raise ValidationError(f"seed components must be nonnegative integers, got {seed!r}")
    return parts


def make_rng(seed) -> np.random.Generator:
    """Generator keyed by an integer seed or a tuple of integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_seed_key(seed))))


def derived_rng(master_seed, *stream: int) -> np.random.Generator:
    """Stream for a sub-task, keyed by ``(master_seed, *stream)``."""
    return make_rng(_seed_key(master_seed) + tuple(int(s) for s in stream))


def map_indexed(fn, count: int, workers: int = 1) -> list:
    """``[fn(0), ..., fn(count - 1)]``, optionally across processes.

    Results are collected by index, so the output is invariant to worker
    count and completion order.  ``fn`` must be picklable when workers > 1.
    """
    if count < 0:
        raise ValidationError("count must be nonnegative")
    if workers is None or workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    chunksize = max(1, count // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count), chunksize=chunksize))
