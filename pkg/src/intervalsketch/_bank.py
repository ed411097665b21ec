"""Compiled bank of fixed-window estimators sharing one input stream.

Runs the same algorithm as :class:`~intervalsketch.fixed_window.FixedWindowEstimator`
for many windows at once, on non-negative integer tokens.

Layout: every token alive in some instance owns a *row*; ``cnt[row, l]`` is
its overflow count inside instance ``l``'s live blocks and ``slot[row, l]``
its Space Saving slot there (-1 if none).  Space Saving slots and the block
rings store row numbers, so the only hashing per arrival is token -> row.
A row is released once no instance references it.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import ceil_div
from .fixed_window import block_size_for

P_W, P_B, P_NB, P_FRAME, P_SS, P_HEADS, P_RING, P_RSIZE, P_BLK, P_BSIZE, P_SLACK = range(11)
# ring head/tail are wrapped positions; QLEN counts queued overflow ids
S_FO, S_USED, S_MIN, S_RHEAD, S_RTAIL, S_BHEAD, S_NBLK, S_FILL, S_QLEN = range(9)
# meta: hash mask, live tokens, rows handed out, free-list size
M_MASK, M_LIVE, M_ROWS, M_FREE = range(4)
# Space Saving slot record: counter value, bucket neighbours (holder row kept apart)
R_VALUE, R_PREV, R_NEXT = range(3)

_EMPTY = -1
_MULT = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True, inline="always")
def _home(key, mask):
    h = np.uint64(key) * _MULT
    return np.int64(h >> np.uint64(20)) & mask


@njit(cache=True)
def _find(keys, key, mask):
    i = _home(key, mask)
    while True:
        k = keys[i]
        if k == key:
            return i
        if k == _EMPTY:
            return -1 - i
        i = (i + 1) & mask


@njit(cache=True)
def _delete(keys, vals, mask, pos):
    keys[pos] = _EMPTY
    hole = pos
    i = (pos + 1) & mask
    while keys[i] != _EMPTY:
        home = _home(keys[i], mask)
        # (hole, i] cyclic: entry at i may move into the hole unless its home is inside
        if hole <= i:
            stays = hole < home <= i
        else:
            stays = home > hole or home <= i
        if not stays:
            keys[hole] = keys[i]
            vals[hole] = vals[i]
            keys[i] = _EMPTY
            hole = i
        i = (i + 1) & mask


@njit(cache=True)
def _row_of(token, keys, vals, meta, row_token, free):
    pos = _find(keys, token, meta[M_MASK])
    if pos >= 0:
        return vals[pos]
    pos = -1 - pos
    if meta[M_FREE] > 0:
        meta[M_FREE] -= 1
        row = free[meta[M_FREE]]
    else:
        row = meta[M_ROWS]
        meta[M_ROWS] += 1
    keys[pos] = token
    vals[pos] = row
    meta[M_LIVE] += 1
    row_token[row] = token
    return row


@njit(cache=True)
def _unref(row, refs, keys, vals, meta, row_token, free):
    refs[row] -= 1
    if refs[row] == 0:
        pos = _find(keys, row_token[row], meta[M_MASK])
        _delete(keys, vals, meta[M_MASK], pos)
        meta[M_LIVE] -= 1
        free[meta[M_FREE]] = row
        meta[M_FREE] += 1


@njit(cache=True, inline="always")
def _unlink(base, hbase, slot, value, rec, ends):
    p = rec[base + slot, R_PREV]
    n = rec[base + slot, R_NEXT]
    if p >= 0:
        rec[base + p, R_NEXT] = n
    else:
        ends[hbase + value, 0] = n
    if n >= 0:
        rec[base + n, R_PREV] = p
    else:
        ends[hbase + value, 1] = p


@njit(cache=True, inline="always")
def _link(base, hbase, slot, value, rec, ends):
    t = ends[hbase + value, 1]
    rec[base + slot, R_PREV] = t
    rec[base + slot, R_NEXT] = -1
    if t >= 0:
        rec[base + t, R_NEXT] = slot
    else:
        ends[hbase + value, 0] = slot
    ends[hbase + value, 1] = slot


@njit(cache=True)
def bank_extend(tokens, params, state, rec, holders, ends,
                ring, markers, cnt, slot_of, refs, row_token, free, keys, vals,
                meta, ops):
    """Feed ``tokens``.  Returns how many were consumed; stops early when
    the row store or the token hash needs to grow."""
    layers = params.shape[0]
    row_cap = refs.shape[0]
    hash_cap = meta[M_MASK] + 1
    for t in range(tokens.shape[0]):
        if (meta[M_FREE] == 0 and meta[M_ROWS] >= row_cap) or 2 * (meta[M_LIVE] + 1) > hash_cap:
            return t
        row = _row_of(tokens[t], keys, vals, meta, row_token, free)
        for l in range(layers):
            b = params[l, P_B]
            fo = state[l, S_FO] + 1
            state[l, S_FO] = fo
            event = True
            if b > 1:
                base = params[l, P_SS]
                hbase = params[l, P_HEADS]
                slot = slot_of[row, l]
                if slot >= 0:
                    old = rec[base + slot, R_VALUE]
                    _unlink(base, hbase, slot, old, rec, ends)
                    if ends[hbase + old, 0] < 0 and old == state[l, S_MIN]:
                        state[l, S_MIN] = old + 1
                else:
                    if state[l, S_USED] < params[l, P_NB]:
                        slot = state[l, S_USED]
                        state[l, S_USED] += 1
                        old = 0
                        state[l, S_MIN] = 1
                    else:
                        old = state[l, S_MIN]
                        slot = ends[hbase + old, 0]
                        _unlink(base, hbase, slot, old, rec, ends)
                        victim = holders[base + slot]
                        slot_of[victim, l] = -1
                        if cnt[victim, l] == 0:
                            _unref(victim, refs, keys, vals, meta, row_token, free)
                        if ends[hbase + old, 0] < 0:
                            state[l, S_MIN] = old + 1
                    holders[base + slot] = row
                    slot_of[row, l] = slot
                    if cnt[row, l] == 0:
                        refs[row] += 1
                rec[base + slot, R_VALUE] = old + 1
                _link(base, hbase, slot, old + 1, rec, ends)
                event = (old + 1) % b == 0
            if event:
                tail = state[l, S_RTAIL]
                ring[params[l, P_RING] + tail] = row
                tail += 1
                if tail == params[l, P_RSIZE]:
                    tail = 0
                state[l, S_RTAIL] = tail
                state[l, S_QLEN] += 1
                if cnt[row, l] == 0 and slot_of[row, l] < 0:
                    refs[row] += 1
                cnt[row, l] += 1
                ops[0] += 1
            fill = state[l, S_FILL] + 1
            if fill == b:
                fill = 0
                idx = state[l, S_BHEAD] + state[l, S_NBLK]
                if idx >= params[l, P_BSIZE]:
                    idx -= params[l, P_BSIZE]
                markers[params[l, P_BLK] + idx] = state[l, S_RTAIL]
                state[l, S_NBLK] += 1
            state[l, S_FILL] = fill
            if fo == params[l, P_FRAME]:
                state[l, S_FO] = 0
                if b > 1:
                    base = params[l, P_SS]
                    for s in range(state[l, S_USED]):
                        holder = holders[base + s]
                        slot_of[holder, l] = -1
                        if cnt[holder, l] == 0:
                            _unref(holder, refs, keys, vals, meta, row_token, free)
                    hbase = params[l, P_HEADS]
                    for v in range(params[l, P_FRAME] + 2):
                        ends[hbase + v, 0] = -1
                        ends[hbase + v, 1] = -1
                    state[l, S_USED] = 0
                    state[l, S_MIN] = 0
            # blocks covering the window: nb, or nb - 1 once the open block
            # plus the frame slack reach a whole block
            needed = params[l, P_NB]
            if params[l, P_SLACK] + fill >= b:
                needed -= 1
            while state[l, S_NBLK] > needed:
                end = markers[params[l, P_BLK] + state[l, S_BHEAD]]
                head = state[l, S_BHEAD] + 1
                if head == params[l, P_BSIZE]:
                    head = 0
                state[l, S_BHEAD] = head
                state[l, S_NBLK] -= 1
                pos = state[l, S_RHEAD]
                ring_base = params[l, P_RING]
                rsize = params[l, P_RSIZE]
                while pos != end:
                    gone = ring[ring_base + pos]
                    pos += 1
                    if pos == rsize:
                        pos = 0
                    state[l, S_QLEN] -= 1
                    cnt[gone, l] -= 1
                    ops[0] += 1
                    if cnt[gone, l] == 0 and slot_of[gone, l] < 0:
                        _unref(gone, refs, keys, vals, meta, row_token, free)
                state[l, S_RHEAD] = pos
    return tokens.shape[0]


@njit(cache=True)
def bank_count(l, token, cnt, keys, vals, meta):
    pos = _find(keys, token, meta[M_MASK])
    return 0 if pos < 0 else cnt[vals[pos], l]


@njit(cache=True)
def _rehash(keys, vals, new_keys, new_vals, new_mask):
    for i in range(keys.shape[0]):
        k = keys[i]
        if k != _EMPTY:
            pos = -1 - _find(new_keys, k, new_mask)
            new_keys[pos] = k
            new_vals[pos] = vals[i]


class FixedWindowBank:
    """Many fixed-window estimators (window ``windows[l]``, accuracy ``eps``)
    updated together on a stream of non-negative integer tokens."""

    def __init__(self, windows, eps, rows: int = 1024):
        windows = [int(w) for w in windows]
        layers = len(windows)
        self.params = np.zeros((layers, 11), dtype=np.int64)
        ss = heads = ring = blk = 0
        for l, w in enumerate(windows):
            b = block_size_for(w * eps)
            nb = ceil_div(w, b)
            frame = nb * b
            rsize = (nb + 2) * b + 1
            self.params[l] = (w, b, nb, frame, ss, heads, ring, rsize, blk, nb + 3, frame - w)
            if b > 1:
                ss += nb
                heads += frame + 2
            ring += rsize
            blk += nb + 3
        self.windows = windows
        self.state = np.zeros((layers, 9), dtype=np.int64)
        # narrow integers halve the working set, which is what limits speed
        biggest = int(max(self.params[:, P_FRAME].max(), self.params[:, P_RSIZE].max())) + 2
        self.small = np.int16 if biggest < np.iinfo(np.int16).max else np.int32
        self.rec = np.full((ss, 3), -1, dtype=self.small)
        self.holders = np.full(ss, -1, dtype=np.int32)
        self.ends = np.full((heads, 2), -1, dtype=self.small)
        self.ring = np.zeros(ring, dtype=np.int32)
        self.markers = np.zeros(blk, dtype=np.int64)
        self.ops = np.zeros(1, dtype=np.int64)
        self.meta = np.zeros(4, dtype=np.int64)
        self._alloc_rows(rows)
        self._alloc_hash(4 * rows)
        self.seen = 0

    def _alloc_rows(self, rows: int) -> None:
        layers = len(self.windows)
        old = getattr(self, "cnt", None)
        cnt = np.zeros((rows, layers), dtype=self.small)
        slot_of = np.full((rows, layers), -1, dtype=self.small)
        refs = np.zeros(rows, dtype=np.int64)
        row_token = np.full(rows, -1, dtype=np.int64)
        free = np.zeros(rows, dtype=np.int64)
        if old is not None:
            n = old.shape[0]
            cnt[:n] = old
            slot_of[:n] = self.slot_of
            refs[:n] = self.refs
            row_token[:n] = self.row_token
            free[:n] = self.free
        self.cnt, self.slot_of, self.refs = cnt, slot_of, refs
        self.row_token, self.free = row_token, free

    def _alloc_hash(self, capacity: int) -> None:
        old = getattr(self, "keys", None)
        keys = np.full(capacity, _EMPTY, dtype=np.int64)
        vals = np.zeros(capacity, dtype=np.int64)
        if old is not None:
            _rehash(old, self.vals, keys, vals, capacity - 1)
        self.keys, self.vals = keys, vals
        self.meta[M_MASK] = capacity - 1

    def extend(self, tokens) -> None:
        tokens = np.ascontiguousarray(tokens, dtype=np.int64)
        if len(tokens) and tokens.min() < 0:
            raise ValueError("bank tokens must be non-negative")
        while len(tokens):
            done = bank_extend(tokens, self.params, self.state, self.rec, self.holders, self.ends, self.ring,
                               self.markers, self.cnt, self.slot_of, self.refs,
                               self.row_token, self.free, self.keys, self.vals,
                               self.meta, self.ops)
            self.seen += done
            tokens = tokens[done:]
            if len(tokens):
                if self.meta[M_FREE] == 0 and self.meta[M_ROWS] >= len(self.refs):
                    self._alloc_rows(2 * len(self.refs))
                if 2 * (self.meta[M_LIVE] + 1) > len(self.keys):
                    self._alloc_hash(2 * len(self.keys))

    def count(self, layer: int, token: int) -> int:
        return int(bank_count(layer, token, self.cnt, self.keys, self.vals, self.meta))

    def query(self, layer: int, token: int) -> int:
        b = int(self.params[layer, P_B])
        return b * self.count(layer, token) + 2 * b - 2

    def block_size(self, layer: int) -> int:
        return int(self.params[layer, P_B])

    @property
    def live_tokens(self) -> int:
        return int(self.meta[M_LIVE])

    def counters(self) -> int:
        """Stored counters: Space Saving slots plus queued overflow ids."""
        b = self.params[:, P_B]
        ss = int(self.params[b > 1, P_NB].sum())
        queued = int(self.state[:, S_QLEN].sum())
        return ss + queued
