"""Reproducible chunked Monte Carlo driver.

Work is split into fixed-size chunks; each chunk gets its own counter-based
Philox stream keyed by (seed, chunk index).  Chunk boundaries never depend on
the worker count, so results are bit-identical for any parallelism level.
"""

from concurrent.futures import ProcessPoolExecutor

import numpy as np

CHUNK_SIZE = 4096


def chunk_rng(seed, chunk_index):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(chunk_index),))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_sizes(n):
    full, rem = divmod(int(n), CHUNK_SIZE)
    sizes = [CHUNK_SIZE] * full
    if rem:
        sizes.append(rem)
    return sizes


def _run_one(args):
    task, seed, index, size = args
    return task(size, chunk_rng(seed, index))


def run_chunked(task, n, seed, workers=1):
    """Concatenate task(size, rng) over fixed chunks, in chunk order.

    task must be picklable (a module-level callable or functools.partial of
    one) when workers > 1.  It may return an array or a tuple of arrays of
    length `size`.
    """
    sizes = _chunk_sizes(n)
    jobs = [(task, seed, i, size) for i, size in enumerate(sizes)]
    if workers <= 1:
        parts = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=int(workers)) as ex:
            parts = list(ex.map(_run_one, jobs, chunksize=4))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[k] for p in parts]) for k in range(len(parts[0])))
    return np.concatenate(parts)
