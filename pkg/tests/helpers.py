"""Shared stream generators and brute-force references for the tests."""

from __future__ import annotations

import numpy as np


def zipf_codes(alpha: float, universe: int, count: int, seed: int) -> np.ndarray:
    weights = np.arange(1, universe + 1, dtype=float) ** -alpha
    weights /= weights.sum()
    return np.random.default_rng(seed).choice(universe, size=count, p=weights)


def window_count(codes: np.ndarray, seen: int, x, i: int, j: int) -> int:
    """Exact count of x at recency positions i+1..j after `seen` arrivals."""
    return int(np.count_nonzero(codes[seen - j:seen - i] == x))


class BlockOracle:
    """Brute-force block stream: blocks[-1] is the open block."""

    def __init__(self):
        self.blocks = [[]]

    def add(self, x):
        self.blocks[-1].append(x)

    def end_block(self):
        self.blocks.append([])

    def query(self, x, i, j):
        # recency 1 = open block
        picked = self.blocks[max(len(self.blocks) - j, 0):len(self.blocks) - i] if i < j else []
        return sum(block.count(x) for block in picked)


def random_block_stream(rng, blocks: int, universe: int, max_per_block: int):
    """Blocks of distinct items (an item enters a block at most once)."""
    out = []
    for _ in range(blocks):
        size = int(rng.integers(0, max_per_block + 1))
        out.append(rng.choice(universe, size=min(size, universe), replace=False).tolist())
    return out


def grid_check(make, n: int, blocks, universe: int, checkpoints, on_query=None):
    """Feed `blocks` (each a list of items) into a fresh solver and compare the
    exhaustive (i, j) grid with brute force at each checkpoint.

    At checkpoint c, blocks 1..c are complete and block c+1 is open (its
    items already added).  `on_query(solver, i, j)` runs after every query.
    Returns the number of mismatches.
    """
    solver = make()
    counts = np.zeros((len(blocks) + 1, universe), dtype=np.int64)
    for b, items in enumerate(blocks, 1):
        for x in items:
            counts[b, x] += 1
    cum = np.cumsum(counts, axis=0)
    done = 0
    mismatches = 0
    for c in sorted(checkpoints):
        assert c < len(blocks)
        while done < c:
            for x in blocks[done]:
                solver.add(x)
            solver.end_block()
            done += 1
        for x in blocks[done]:
            solver.add(x)
        for i in range(n + 1):
            for j in range(i, n + 1):
                expect = cum[done + 1 - i] - cum[max(done + 1 - j, 0)]
                for x in range(universe):
                    got = solver.block_interval_query(x, i, j)
                    if on_query is not None:
                        on_query(solver, i, j)
                    if got != expect[x]:
                        mismatches += 1
        solver.end_block()
        done += 1
    return mismatches
