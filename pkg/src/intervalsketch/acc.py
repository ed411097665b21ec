"""ACC_k: exact block-interval counts from k levels of cumulative tables.

Blocks are grouped into frames of ``window`` blocks, numbered 1..window.
A level-l segment spans ``d**l`` blocks.  The table published when block
``b`` closes sits at the highest level ``l`` with ``d**l | b`` (capped at
k-1, and forced to k-1 for the last block of the frame) and counts arrivals
from the start of the enclosing level-(l+1) segment; level k-1 tables count
from the frame start.  A prefix of the frame therefore costs at most k
table reads.

Tables are kept in one slot per block position.  A slot is overwritten one
frame later; the displaced table is parked in ``ghosts[l]`` because a window
reaching back into the previous frame may still need it.
"""

from __future__ import annotations

from .core import BadBlockIndex, acc_arity


class AccSketch:
    def __init__(self, window: int, levels: int):
        if window < 1:
            raise BadBlockIndex("window must hold at least one block")
        self.window = window
        self.levels = levels
        self.arity = acc_arity(window, levels)
        self.spans = [self.arity ** level for level in range(levels)]
        self.inc: list[dict] = [{} for _ in range(levels)]
        self.tables: list[dict | None] = [None] * (window + 1)
        self.ghosts: list[dict | None] = [None] * levels
        self.offset = 1
        self.reads = 0
        self.writes = 0

    def level_of(self, slot: int) -> int:
        if slot == self.window:
            return self.levels - 1
        level = 0
        while level + 1 < self.levels and slot % self.spans[level + 1] == 0:
            level += 1
        return level

    def add(self, token) -> None:
        for table in self.inc:
            table[token] = table.get(token, 0) + 1
        self.writes += self.levels

    def end_block(self) -> None:
        slot = self.offset
        level = self.level_of(slot)
        for lower in range(level):
            self.inc[lower] = {}
            self.ghosts[lower] = None
        self.ghosts[level] = self.tables[slot]
        if slot == self.window:
            # frame closes: the top incomplete table restarts, so move it
            self.tables[slot] = self.inc[level]
            self.inc[level] = {}
            self.ghosts[level] = None
        else:
            self.tables[slot] = dict(self.inc[level])
        self.offset = slot % self.window + 1

    def _read(self, table: dict | None, token) -> int:
        self.reads += 1
        return 0 if table is None else table.get(token, 0)

    def _prefix(self, token, upto: int, previous: bool) -> int:
        """Count over frame blocks 1..upto, in the current or previous frame."""
        total = 0
        outer = 0
        for level in range(self.levels - 1, -1, -1):
            span = self.spans[level]
            slot = upto - upto % span
            if slot == outer:
                continue
            outer = slot
            if previous and slot < self.offset:
                table = self.ghosts[level]
            else:
                table = self.tables[slot]
            total += self._read(table, token)
        return total

    def win_query(self, token, w: int) -> int:
        """Exact count of ``token`` over the last ``w`` blocks (open block first)."""
        if not 0 <= w <= self.window:
            raise BadBlockIndex(f"w={w} outside 0..{self.window}")
        if w == 0:
            return 0
        current = self._read(self.inc[self.levels - 1], token)
        if w <= self.offset:
            return current - self._prefix(token, self.offset - w, previous=False)
        start = self.window + self.offset - w
        whole_previous = self._read(self.tables[self.window], token)
        return current + whole_previous - self._prefix(token, start, previous=True)

    def block_interval_query(self, token, i: int, j: int) -> int:
        if not 0 <= i <= j <= self.window:
            raise BadBlockIndex(f"need 0 <= i <= j <= {self.window}, got ({i}, {j})")
        if i == 0:
            return self.win_query(token, j)
        return self.win_query(token, j) - self.win_query(token, i)

    def candidates(self, i: int, j: int) -> set:
        """Tokens that may have a non-zero count in blocks i+1..j."""
        keys = set(self.inc[self.levels - 1])
        if j > self.offset and self.tables[self.window] is not None:
            keys.update(self.tables[self.window])
        return keys

    def live_entries(self) -> int:
        tables = [t for t in self.tables if t]
        tables += [t for t in self.ghosts if t]
        tables += self.inc
        return sum(len(t) for t in tables)
