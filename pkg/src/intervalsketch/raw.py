"""RAW baseline: one fixed-window estimator per multiple of ``g = W*eps/4``.

Instance ``l`` (1-based) watches the last ``l*g`` elements with accuracy
``eps/4``.  An interval ``(i, j)`` is answered from the instances bracketing
it: ``A[ceil(j/g)] - A[floor(i/g)] + g`` where ``A[0]`` is identically 0.

The upper instance overshoots ``j`` by at most ``g - 1`` elements and the
lower one undershoots ``i`` by at most ``g - 1``; together with two instance
errors of at most ``W*eps/4`` each and the ``+g`` shift, the estimate lands
in ``[f, f + W*eps - 2]``.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (
    BlockTooSmall, ConfigError, ItemId, NonIntegerEpsilonInverse, WindowNotFull,
    ceil_div, check_interval, parse_epsilon,
)
from .fixed_window import FixedWindowEstimator

ENGINES = ("auto", "compiled", "python")


def raw_granule(window: int, epsilon) -> int:
    eps = parse_epsilon(epsilon)
    if eps.numerator != 1:
        raise NonIntegerEpsilonInverse(f"1/epsilon = {1 / eps} is not an integer")
    g = Fraction(window) * eps / 4
    if g < 1:
        raise BlockTooSmall(f"W*eps/4 = {g} < 1")
    if g.denominator != 1:
        raise ConfigError(f"RAW needs W*eps/4 to be an integer, got {g}")
    return int(g)


class RawSketch:
    def __init__(self, window: int, epsilon, engine: str = "auto"):
        if engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        self.window = window
        self.epsilon = parse_epsilon(epsilon)
        self.granule = raw_granule(window, self.epsilon)
        self.count = ceil_div(window, self.granule)
        self.windows = [l * self.granule for l in range(1, self.count + 1)]
        self.seen = 0
        self.instance_updates = 0
        self.instance_queries = 0
        self.last_query_instances = 0
        inner = self.epsilon / 4
        if engine == "auto":
            engine = "compiled" if _bank_available() else "python"
        self.engine = engine
        if engine == "compiled":
            from ._bank import FixedWindowBank
            self._bank = FixedWindowBank(self.windows, inner)
            self._tokens: dict = {}
            self.instances = None
        else:
            self._bank = None
            self.instances = [FixedWindowEstimator(w, inner) for w in self.windows]

    def _token(self, x: ItemId) -> int:
        t = self._tokens.get(x)
        if t is None:
            t = self._tokens[x] = len(self._tokens)
        return t

    def add(self, x: ItemId) -> None:
        self.extend((x,))

    def extend(self, items) -> None:
        items = list(items)
        if self._bank is not None:
            self._bank.extend([self._token(x) for x in items])
        else:
            for x in items:
                for inst in self.instances:
                    inst.add(x)
        self.seen += len(items)
        self.instance_updates += len(items) * self.count

    def _instance_query(self, level: int, x: ItemId) -> int:
        if level == 0:
            return 0
        self.last_query_instances += 1
        w = self.windows[level - 1]
        if self.seen < w:
            raise WindowNotFull(f"instance {level} needs {w} elements, {self.seen} seen")
        if self._bank is None:
            return self.instances[level - 1].query(x)
        t = self._tokens.get(x)
        if t is None:
            # never seen: every instance holds 0 overflow events for it
            b = self._bank.block_size(level - 1)
            return 2 * b - 2
        return self._bank.query(level - 1, t)

    def interval_query(self, x: ItemId, i: int, j: int) -> int:
        check_interval(i, j, self.window, self.seen)
        g = self.granule
        self.last_query_instances = 0
        upper = self._instance_query(ceil_div(j, g), x)
        lower = self._instance_query(i // g, x)
        self.instance_queries += self.last_query_instances
        return upper - lower + g

    def counters(self) -> int:
        """Counters held across all instances (Space Saving slots + queued ids)."""
        if self._bank is not None:
            return self._bank.counters()
        return sum(inst.counters() for inst in self.instances)

    def live_entries(self) -> int:
        return self.counters()

    def bytes_model(self, id_bytes: int = 8, count_bytes: int = 4) -> int:
        return self.counters() * (id_bytes + count_bytes)


def _bank_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


__all__ = ["RawSketch", "raw_granule", "ENGINES"]
