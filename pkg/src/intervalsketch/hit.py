"""HIT: hierarchical interval tree over per-block tables.

Completed blocks carry a global serial number t = 1, 2, ...  Block t owns
tables at levels 0..ctz(t); the level-l table covers blocks t-2**l+1..t and
is the entrywise sum of the two level-(l-1) tables below it.  A query walks
backwards from the newest queried block, always taking the largest aligned
span that stays inside the interval, so it never reads a table reaching
past the window's trailing edge.

Serial numbers make ctz exact for any window length, so the window does not
need to be a power of two.  Only spans lying entirely inside the window are
kept.
"""

from __future__ import annotations

from .core import BadBlockIndex, ctz, log2_floor


def merge(left: dict, right: dict) -> dict:
    if len(left) < len(right):
        left, right = right, left
    merged = dict(left)
    for key, count in right.items():
        merged[key] = merged.get(key, 0) + count
    return merged


class HitSketch:
    def __init__(self, window: int):
        if window < 1:
            raise BadBlockIndex("window must hold at least one block")
        self.window = window
        self.top_level = log2_floor(max(window - 1, 1))
        self.tables: dict[int, list[dict]] = {}
        self.inc: dict = {}
        self.serial = 0
        self.writes = 0
        self.lookups = 0
        self.last_lookups = 0

    def add(self, token) -> None:
        self.inc[token] = self.inc.get(token, 0) + 1
        self.writes += 1

    def end_block(self) -> None:
        self.serial += 1
        t = self.serial
        levels = [self.inc]
        self.inc = {}
        for level in range(1, min(ctz(t), self.top_level) + 1):
            older = self.tables[t - (1 << (level - 1))][level - 1]
            levels.append(merge(levels[level - 1], older))
        self.tables[t] = levels
        # completed blocks in the window are serials t-window+2 .. t
        self.tables.pop(t - self.window + 1, None)
        # a level-l span that now reaches past the window's old edge can never
        # be read again (and no later merge uses it), so drop it
        for level in range(1, self.top_level + 1):
            old = t - self.window + (1 << level)
            if old >= 1 and len(self.tables.get(old, ())) > level:
                del self.tables[old][level:]

    def _spans(self, i: int, j: int):
        """Yield (serial, level) for the greedy cover of completed blocks in i+1..j."""
        lo = self.serial - j + 2
        hi = self.serial - max(i + 1, 2) + 2
        lo = max(lo, 1)
        while hi >= lo:
            level = min(ctz(hi), log2_floor(hi - lo + 1))
            yield hi, level
            hi -= 1 << level

    def block_interval_query(self, token, i: int, j: int) -> int:
        if not 0 <= i <= j <= self.window:
            raise BadBlockIndex(f"need 0 <= i <= j <= {self.window}, got ({i}, {j})")
        count = 0
        lookups = 0
        if i == 0 and j >= 1:
            count += self.inc.get(token, 0)
            lookups += 1
        for serial, level in self._spans(i, j):
            count += self.tables[serial][level].get(token, 0)
            lookups += 1
        self.lookups += lookups
        self.last_lookups = lookups
        return count

    def candidates(self, i: int, j: int) -> set:
        keys = set(self.inc) if i == 0 else set()
        for serial, level in self._spans(i, j):
            keys.update(self.tables[serial][level])
        return keys

    def live_entries(self) -> int:
        return len(self.inc) + sum(len(t) for levels in self.tables.values() for t in levels)
