"""Frequency estimation over a fixed window of the last ``w`` arrivals.

The stream is cut into frames of ``nb * b`` arrivals (``nb = ceil(w/b)``)
with a Space Saving instance of ``nb`` counters flushed at every frame
boundary.  Whenever an item's counter reaches a multiple of ``b`` the item
is written into the open block; ``hist`` counts those overflow events over
the smallest run of blocks that covers the window.

Error accounting for ``estimate = b * hist[x] + 2b - 2``:

* inside one frame, counter value and true count differ by less than ``b``
  (a counter that reached ``b`` is never the minimum again because the
  frame has at most ``nb * b`` arrivals), so ``b * events`` over a frame
  slice is within ``b - 1`` of the true slice count, in either direction;
* the window touches at most two frames: ``+-(2b - 2)``;
* the covering blocks extend past the window's old end by at most ``b - 1``.

Hence ``b * hist[x]`` lies in ``[f - 2b + 2, f + 3b - 3]`` and the estimate in
``[f, f + 5b - 5]``.  Choosing ``b = floor(w*eps/5) + 1`` keeps
``5b - 5 <= w*eps``; with ``w*eps < 5`` this gives ``b = 1`` and exact counts.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

from .core import ItemId, WindowNotFull, ceil_div
from .space_saving import SpaceSaving


def block_size_for(budget) -> int:
    return int(Fraction(budget) // 5) + 1


class FixedWindowEstimator:
    def __init__(self, w: int, eps):
        if w < 1:
            raise ValueError("window must be positive")
        self.w = w
        self.eps = Fraction(eps)
        self.b = block_size_for(w * self.eps)
        self.blocks_per_frame = ceil_div(w, self.b)
        self.frame = self.blocks_per_frame * self.b
        # with b = 1 every arrival is an overflow event and the counters are idle
        self.ss = SpaceSaving(self.blocks_per_frame) if self.b > 1 else None
        self.seen = 0
        self.fo = 0
        self.hist: dict = {}
        self.block_queue: deque[list] = deque()
        self.open_block: list = []
        self.table_ops = 0

    def add(self, x: ItemId) -> None:
        self.seen += 1
        self.fo += 1
        b = self.b
        if b == 1 or self.ss.add(x) % b == 0:
            self.open_block.append(x)
            self.hist[x] = self.hist.get(x, 0) + 1
            self.table_ops += 1
        if self.fo % b == 0:
            self.block_queue.append(self.open_block)
            self.open_block = []
        if self.fo == self.frame:
            self.fo = 0
            if self.ss is not None:
                self.ss.flush()
        needed = ceil_div(self.w - self.fo % b, b)
        while len(self.block_queue) > needed:
            for y in self.block_queue.popleft():
                left = self.hist[y] - 1
                if left:
                    self.hist[y] = left
                else:
                    del self.hist[y]
                self.table_ops += 1

    def query(self, x: ItemId) -> int:
        if self.seen < self.w:
            raise WindowNotFull(f"{self.seen} of {self.w} arrivals seen")
        return self.b * self.hist.get(x, 0) + 2 * self.b - 2

    @property
    def error_bound(self) -> int:
        return 5 * self.b - 5

    def counters(self) -> int:
        """Stored counters: Space Saving slots plus queued overflow ids."""
        slots = self.ss.capacity if self.ss is not None else 0
        return slots + sum(map(len, self.block_queue)) + len(self.open_block)
