"""Deterministic chunked execution.

Workers never change results: work is split into chunks of a fixed size
(independent of the worker count), each chunk writes a disjoint slice of the
output, and scalar reductions always run over the fully assembled arrays in a
fixed pairwise order.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 512


def chunk_ranges(n_items, chunk=CHUNK):
    """Split range(n_items) into [start, stop) pairs of a fixed width."""
    return [(s, min(s + chunk, n_items)) for s in range(0, n_items, chunk)]


def run_chunked(fn, n_items, workers=1, chunk=CHUNK):
    """Call fn(start, stop) for each chunk, in parallel when workers > 1.

    Returns the list of per-chunk results in chunk order. fn must only touch
    state local to its slice; numpy releases the GIL so threads give real
    speedups on the heavy kernels.
    """
    ranges = chunk_ranges(n_items, chunk)
    if workers <= 1 or len(ranges) <= 1:
        return [fn(s, e) for s, e in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, s, e) for s, e in ranges]
        return [f.result() for f in futures]


def pairwise_sum(values):
    """Sum a 1-D array by recursive halving (fixed reduction tree).

    The result depends only on the element order, not on chunking or worker
    count, which keeps reports bit-reproducible.
    """
    a = np.ascontiguousarray(values, dtype=np.float64).ravel()
    while a.size > 1:
        half = a.size // 2
        folded = a[:half] + a[half : 2 * half]
        if a.size % 2:
            folded = np.concatenate([folded, a[2 * half :]])
        a = folded
    return float(a[0]) if a.size else 0.0
