"""Space Saving with constant-time flush.

Counters live in fixed slots.  Each slot carries the epoch it was written
in; bumping the epoch on ``flush`` makes every slot read as zero without
touching it.  Value buckets (value -> slots in least-recently-updated
order) give O(1) access to the minimal counter.
"""

from __future__ import annotations

from .core import ItemId


class SpaceSaving:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.insertions = 0
        self.epoch = 0
        self._items: list = [None] * capacity
        self._values = [0] * capacity
        self._stamps = [-1] * capacity
        self._where: dict = {}
        # value -> [epoch, {slot: None}]; stale epochs read as empty buckets
        self._buckets: dict[int, list] = {}
        self._used = 0
        self._min_live = 0

    def _bucket(self, value: int) -> dict:
        entry = self._buckets.get(value)
        if entry is None:
            entry = self._buckets[value] = [self.epoch, {}]
        elif entry[0] != self.epoch:
            entry[0] = self.epoch
            entry[1] = {}
        return entry[1]

    def _slot_of(self, x: ItemId):
        slot = self._where.get(x)
        if slot is not None and self._stamps[slot] == self.epoch and self._items[slot] == x:
            return slot
        return None

    def add(self, x: ItemId) -> int:
        """Count one arrival of ``x`` and return its counter value afterwards."""
        self.insertions += 1
        values = self._values
        slot = self._slot_of(x)
        if slot is not None:
            old = values[slot]
            bucket = self._bucket(old)
            del bucket[slot]
            if not bucket and old == self._min_live:
                self._min_live = old + 1
        elif self._used < self.capacity:
            slot = self._used
            self._used += 1
            stale = self._items[slot]
            if stale is not None and self._where.get(stale) == slot:
                del self._where[stale]
            self._items[slot] = x
            self._stamps[slot] = self.epoch
            self._where[x] = slot
            values[slot] = 0
            old = 0
            self._min_live = 1 if self._used == 1 else min(self._min_live, 1)
        else:
            old = self._min_live
            bucket = self._bucket(old)
            slot = next(iter(bucket))
            del bucket[slot]
            del self._where[self._items[slot]]
            self._items[slot] = x
            self._where[x] = slot
            if not bucket:
                self._min_live = old + 1
        values[slot] = old + 1
        self._bucket(old + 1)[slot] = None
        return old + 1

    def query(self, x: ItemId) -> int:
        slot = self._slot_of(x)
        if slot is not None:
            return self._values[slot]
        return self.min_value

    def counter(self, x: ItemId) -> int | None:
        """Value of ``x``'s own counter, or None when it holds none."""
        slot = self._slot_of(x)
        return None if slot is None else self._values[slot]

    @property
    def min_value(self) -> int:
        if self._used < self.capacity:
            return 0
        return self._min_live

    def flush(self) -> None:
        self.epoch += 1
        self.insertions = 0
        self._used = 0
        self._min_live = 0

    def holders(self) -> dict:
        """Live ``item -> counter`` pairs (O(capacity), for inspection)."""
        return {self._items[s]: self._values[s] for s in range(self._used)}

    def __len__(self) -> int:
        return self._used

    def __contains__(self, x: ItemId) -> bool:
        return self._slot_of(x) is not None
