"""Shared fork-join substrate: seeded shuffle, even partitioning, block map
and pairwise reduction.

All shuffles use NumPy's PCG64 generator so a given (count, k, seed) always
yields the same permutation. Workers receive immutable inputs and hand back
single-owner partial results; merging happens on the caller's thread.
"""
from __future__ import annotations

import atexit
import multiprocessing
import os
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

MODES = ("serial", "thread", "process")


@dataclass
class Partition:
    order: np.ndarray  # permutation of range(count)
    blocks: list[np.ndarray]  # k consecutive slices of `order`
    k: int
    seed: int


def shuffle_partition(count: int, k: int, seed: int) -> Partition:
    """Uniform seeded permutation split into k blocks, sizes within 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(count)
    blocks = np.array_split(order, k)
    return Partition(order=order, blocks=blocks, k=k, seed=seed)


def reduce_pairwise(items, combine):
    """ceil(log2 k) rounds of pairwise merges; the higher-indexed partner of
    each pair survives, odd tails are carried to the next round.

    Requires an associative-commutative `combine`; then the result equals a
    flat fold in any order.
    """
    level = list(items)
    if not level:
        raise ValueError("reduce_pairwise needs at least one item")
    while len(level) > 1:
        nxt = [combine(level[j - 1], level[j]) for j in range(1, len(level), 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


_POOLS: dict[tuple[str, int], Executor] = {}


def _shutdown_pools():
    for pool in _POOLS.values():
        pool.shutdown(wait=False, cancel_futures=True)
    _POOLS.clear()


atexit.register(_shutdown_pools)


def _get_pool(mode: str, workers: int) -> Executor:
    key = (mode, workers)
    pool = _POOLS.get(key)
    if pool is None:
        if mode == "process":
            ctx = multiprocessing.get_context("fork")
            pool = ProcessPoolExecutor(max_workers=workers, mp_context=ctx)
        else:
            pool = ThreadPoolExecutor(max_workers=workers)
        _POOLS[key] = pool
    return pool


def map_blocks(fn, block_args, k: int, mode: str = "thread") -> list:
    """Apply `fn` to each block argument, on up to k workers.

    `fn` must be a picklable top-level function when mode="process". Results
    come back in block order regardless of completion order.
    """
    if mode not in MODES:
        raise ValueError(f"unknown execution mode {mode!r}")
    block_args = list(block_args)
    workers = min(k, len(block_args))
    if mode == "serial" or workers <= 1:
        return [fn(a) for a in block_args]
    return list(_get_pool(mode, workers).map(fn, block_args))


def available_cores() -> int:
    return os.cpu_count() or 1
