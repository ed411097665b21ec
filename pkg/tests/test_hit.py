import math

import numpy as np
import pytest

from intervalsketch.core import BadBlockIndex
from intervalsketch.hit import HitSketch, merge
from helpers import grid_check, random_block_stream


def test_one_write_per_add():
    h = HitSketch(16)
    h.add("x")
    assert h.writes == 1


def test_level0_table_of_block_seven():
    h = HitSketch(16)
    for t in range(1, 8):
        if t == 7:
            h.add("b")
        h.end_block()
    assert h.tables[7][0] == {"b": 1}
    assert len(h.tables[7]) == 1  # odd serial: level 0 only


def test_block_eight_levels():
    h = HitSketch(16)
    for t in range(1, 9):
        if t == 7:
            h.add("b")
        h.end_block()
    assert len(h.tables[8]) == 4
    assert h.tables[8][2] == {"b": 1}  # covers blocks 5..8


def test_empty_block_publishes_empty_table():
    h = HitSketch(8)
    h.end_block()
    assert h.tables[1] == [{}]


def test_merge_sums_shared_keys():
    left, right = {"a": 2, "b": 1}, {"a": 3, "c": 4}
    assert merge(left, right) == {"a": 5, "b": 1, "c": 4}
    assert left == {"a": 2, "b": 1}


def test_dyadic_consistency():
    h = HitSketch(64)
    rng = np.random.default_rng(1)
    for _ in range(200):
        for x in rng.choice(9, size=3, replace=False).tolist():
            h.add(x)
        h.end_block()
        t = h.serial
        levels = h.tables[t]
        for lvl in range(1, len(levels)):
            older = h.tables[t - (1 << (lvl - 1))][lvl - 1]
            assert levels[lvl] == merge(levels[lvl - 1], older)


def test_empty_interval_costs_nothing():
    h = HitSketch(8)
    for _ in range(10):
        h.add(1)
        h.end_block()
    assert h.block_interval_query(1, 3, 3) == 0
    assert h.last_lookups == 0


def test_aligned_span_is_one_lookup():
    h = HitSketch(64)
    for _ in range(40):  # serial 40; open block is serial 41
        h.add("x")
        h.end_block()
    # completed block at recency r has serial 42 - r; blocks 37..40 are recency 2..5
    assert h.block_interval_query("x", 1, 5) == 4
    assert h.last_lookups == 1


def test_index_checks():
    h = HitSketch(8)
    with pytest.raises(BadBlockIndex):
        h.block_interval_query("x", 0, 9)


@pytest.mark.parametrize("n", [8, 64])
def test_exact_on_grid_with_lookup_bound(n):
    rng = np.random.default_rng(n)
    universe = 6
    worst = []

    def probe(solver, i, j):
        worst.append(solver.last_lookups)

    for _ in range(3):
        blocks = random_block_stream(rng, 3 * n + 5, universe, 4)
        checkpoints = sorted(set(rng.integers(n, len(blocks), size=3).tolist()))
        assert grid_check(lambda: HitSketch(n), n, blocks, universe, checkpoints, probe) == 0
    assert max(worst) <= 2 * math.log2(n)


def test_space_bound():
    n = 64
    h = HitSketch(n)
    rng = np.random.default_rng(3)
    events = []
    for _ in range(5 * n):
        items = rng.choice(20, size=int(rng.integers(0, 5)), replace=False).tolist()
        for x in items:
            h.add(x)
        h.end_block()
        events.append(len(items))
        live = sum(events[-n:])
        assert h.live_entries() <= live * (math.log2(n) + 1)
