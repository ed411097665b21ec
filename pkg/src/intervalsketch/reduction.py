"""Interval frequency and heavy hitters on top of an exact block solver.

A Space Saving instance with one counter per block runs over frames of
``blocks * s`` arrivals.  Every time an item's counter reaches a multiple of
``s`` the item is written into the open block of the solver; the solver
then answers exact block-interval counts.  An interval query is mapped to
the run of blocks covering it and answered as ``s * (count + 2)``.

Error budget (standard mode, block size ``s``):

* counter value vs. true count within a frame slice: ``+-(s - 1)``, and a
  window meets at most two frames, so ``s * count`` is within ``2s - 2`` of
  the covered count;
* covering blocks overshoot the interval by at most ``s - 1`` at each end.

So ``s * count`` lies in ``[f - 2s + 2, f + 4s - 4]`` and the estimate in
``[f + 2, f + 6s - 2]``; ``s <= W*eps/6`` keeps it under ``f + W*eps``.

A window of W arrivals overlaps ``blocks + 1`` blocks (the open one
included), so solvers are built with that window.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Protocol

from .acc import AccSketch
from .core import (
    ItemId, ModeChangeAfterStart, SketchConfig, ceil_div, check_interval,
    validate_config,
)
from .hit import HitSketch
from .space_saving import SpaceSaving


class BlockIntervalSolver(Protocol):
    window: int

    def add(self, token) -> None: ...

    def end_block(self) -> None: ...

    def block_interval_query(self, token, i: int, j: int) -> int: ...

    def candidates(self, i: int, j: int) -> set: ...

    def live_entries(self) -> int: ...


class Interner:
    """Dense integer tokens for raw ids, remembered for two frames.

    A token survives as long as its item records block events in the
    current or previous frame, so tables spanning the frame boundary agree
    on it.  Tokens are never reused.
    """

    def __init__(self):
        self.current: dict = {}
        self.previous: dict = {}
        self.names: list[dict] = [{}, {}]  # current, previous
        self.next_token = 0

    def token(self, x: ItemId) -> int:
        t = self.current.get(x)
        if t is None:
            t = self.previous.get(x)
            if t is None:
                t = self.next_token
                self.next_token += 1
            self.current[x] = t
            self.names[0][t] = x
        return t

    def lookup(self, x: ItemId):
        t = self.current.get(x)
        return self.previous.get(x) if t is None else t

    def name(self, token: int):
        found = self.names[0].get(token)
        return self.names[1].get(token) if found is None else found

    def rotate(self) -> None:
        self.previous = self.current
        self.current = {}
        self.names = [{}, self.names[0]]

    def __len__(self) -> int:
        return len(self.current) + len(self.previous)


@dataclass(frozen=True)
class HeavyHitters:
    """Result of an interval heavy-hitter query.

    When the threshold is at or below the estimator's floor (``2s``) every
    item of the universe qualifies; ``everything`` is then set and
    ``items`` lists only the tracked items.
    """

    items: frozenset
    everything: bool = False
    threshold: float = 0.0
    estimates: dict = field(default_factory=dict, compare=False)

    def __contains__(self, x) -> bool:
        return self.everything or x in self.items

    def __iter__(self) -> Iterator:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)


def make_solver(algo: str, window: int, levels: int = 1) -> BlockIntervalSolver:
    if algo == "acc":
        return AccSketch(window, levels)
    if algo == "hit":
        return HitSketch(window)
    raise ValueError(f"unknown block solver {algo!r}")


class ReductionSketch:
    def __init__(self, cfg: SketchConfig, algo: str = "hit", *,
                 deamortize: bool = False):
        self.algo = algo
        self.deamortize = deamortize
        self.seen = 0
        self.fo = 0
        self.solver_adds = 0
        self._configure(cfg)

    def _configure(self, cfg: SketchConfig) -> None:
        self.cfg = cfg
        self.s = cfg.block_size
        self.ss = SpaceSaving(cfg.ss_capacity)
        self.solver = make_solver(self.algo, cfg.blocks + 1, cfg.acc_levels)
        self.interner = Interner()
        self.block_serial = 0
        # deamortized mode: events waiting for delivery, oldest first
        self.pending: deque = deque()
        self.pending_counts: dict[int, dict] = {}

    @classmethod
    def build(cls, window: int, epsilon, algo: str = "hit", levels: int = 1,
              block_mode: str = "standard", **kwargs) -> "ReductionSketch":
        return cls(validate_config(window, epsilon, levels, block_mode), algo, **kwargs)

    def set_block_size_mode(self, mode: str) -> "ReductionSketch":
        if self.seen:
            raise ModeChangeAfterStart("block mode must be chosen before the first add")
        cfg = self.cfg
        self._configure(validate_config(cfg.window, cfg.epsilon, cfg.acc_levels, mode))
        return self

    @property
    def open_fill(self) -> int:
        """Arrivals already in the open block."""
        return self.fo % self.s

    def add(self, x: ItemId) -> None:
        self.seen += 1
        self.fo += 1
        s = self.s
        if self.deamortize and self.pending and self.pending[0][1] < self.block_serial:
            self._deliver()
        if self.ss.add(x) % s == 0:
            token = self.interner.token(x)
            if self.deamortize:
                self.pending.append((token, self.block_serial))
                counts = self.pending_counts.setdefault(self.block_serial, {})
                counts[token] = counts.get(token, 0) + 1
            else:
                self.solver.add(token)
                self.solver_adds += 1
        if self.fo % s == 0:
            self.solver.end_block()
            self.block_serial += 1
        if self.fo == self.cfg.frame:
            self.fo = 0
            self.ss.flush()
            self.interner.rotate()

    def _deliver(self) -> None:
        token, serial = self.pending.popleft()
        counts = self.pending_counts[serial]
        if counts[token] == 1:
            del counts[token]
        else:
            counts[token] -= 1
        if not counts:
            del self.pending_counts[serial]
        self.solver.add(token)
        self.solver_adds += 1

    def extend(self, items) -> None:
        for x in items:
            self.add(x)

    # -- query side -------------------------------------------------------

    def _block_of(self, p: int) -> int:
        c = self.open_fill
        return 1 if p <= c else 1 + ceil_div(p - c, self.s)

    def _block_bounds(self, block: int) -> tuple[int, int]:
        c = self.open_fill
        if block == 1:
            return 1, c
        return c + (block - 2) * self.s + 1, c + (block - 1) * self.s

    def block_range(self, i: int, j: int) -> tuple[int, int]:
        """Blocks (recency, 1 = open block) whose events answer ``(i, j)``.

        Returns ``(lo, hi)``; the range is empty when ``lo > hi``.
        """
        if i == j:
            return 1, 0
        lo, hi = self._block_of(i + 1), self._block_of(j)
        if self.cfg.block_mode == "reduced":
            twice = 2 * (min(j, self._block_bounds(lo)[1]) - i)
            if twice < self.s:
                lo += 1
            if hi >= lo:
                twice = 2 * (j - max(i + 1, self._block_bounds(hi)[0]) + 1)
                if twice < self.s:
                    hi -= 1
        return lo, hi

    def _count(self, token, lo: int, hi: int) -> int:
        if lo > hi:
            return 0
        if not self.deamortize:
            return self.solver.block_interval_query(token, lo - 1, hi)
        # solver block q holds the events generated in block q + 1
        total = 0
        if hi >= 2 and max(lo - 1, 1) <= hi - 1:
            total += self.solver.block_interval_query(token, max(lo - 1, 1) - 1, hi - 1)
        for recency in (1, 2):
            if lo <= recency <= hi:
                total += self.pending_counts.get(self.block_serial - recency + 1, {}).get(token, 0)
        return total

    def interval_query(self, x: ItemId, i: int, j: int) -> int:
        check_interval(i, j, self.cfg.window, self.seen)
        token = self.interner.lookup(x)
        count = 0 if token is None else self._count(token, *self.block_range(i, j))
        return self.s * (count + 2)

    def interval_heavy_hitters(self, theta: float, i: int, j: int) -> HeavyHitters:
        """Items whose estimate over ``(i, j)`` reaches ``theta * (j - i)``."""
        if not 0 < theta <= 1:
            raise ValueError("theta must lie in (0, 1]")
        check_interval(i, j, self.cfg.window, self.seen)
        threshold = theta * (j - i)
        lo, hi = self.block_range(i, j)
        tokens = self._candidates(lo, hi)
        estimates = {}
        for token in tokens:
            estimate = self.s * (self._count(token, lo, hi) + 2)
            if estimate >= threshold:
                name = self.interner.name(token)
                if name is not None:
                    estimates[name] = estimate
        # every item, recorded or not, is estimated at >= 2s
        return HeavyHitters(frozenset(estimates), everything=threshold <= 2 * self.s,
                            threshold=threshold, estimates=estimates)

    def _candidates(self, lo: int, hi: int) -> set:
        if lo > hi:
            return set()
        if not self.deamortize:
            return self.solver.candidates(lo - 1, hi)
        keys = set()
        if hi >= 2:
            keys = self.solver.candidates(max(lo - 1, 1) - 1, hi - 1)
        for counts in self.pending_counts.values():
            keys.update(counts)
        return keys

    # -- accounting -------------------------------------------------------

    def live_entries(self) -> int:
        return self.solver.live_entries()

    def bytes_model(self, id_bytes: int = 8, count_bytes: int = 4) -> int:
        table = self.live_entries() * (id_bytes + count_bytes)
        counters = self.ss.capacity * (id_bytes + count_bytes)
        names = len(self.interner) * (id_bytes + id_bytes)
        return table + counters + names
