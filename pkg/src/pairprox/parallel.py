"""Order-preserving chunked process pool for per-pair featurization."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np


def chunk_bounds(n: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, n)) if n else 1
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def map_chunks(fn, obj, pairs: np.ndarray, *args, workers: int = 1, width: int) -> np.ndarray:
    """Apply ``fn(obj, pairs_chunk, *args)`` to contiguous chunks and stack
    the results in input order."""
    if workers <= 1 or len(pairs) < 2 * workers:
        out = fn(obj, pairs, *args)
    else:
        bounds = chunk_bounds(len(pairs), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, obj, pairs[a:b], *args) for a, b in bounds]
            out = np.vstack([f.result() for f in futures])
    return np.asarray(out, dtype=np.float64).reshape(len(pairs), width)
