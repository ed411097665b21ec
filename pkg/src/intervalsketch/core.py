"""Stream model, configuration and the exact reference oracle.

Recency indices count backwards from the stream head: index 1 is the most
recent element.  An interval ``(i, j)`` covers recency positions
``i+1 .. j``, so ``(0, j)`` is "the last j elements".
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable

ItemId = Hashable


class SketchError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SketchError, ValueError):
    pass


class NonIntegerEpsilonInverse(ConfigError):
    pass


class BlockTooSmall(ConfigError):
    pass


class BadAccArity(ConfigError):
    pass


class IndexBeyondWindow(SketchError, IndexError):
    pass


class BadBlockIndex(SketchError, IndexError):
    pass


class WindowNotFull(SketchError):
    pass


class ModeChangeAfterStart(SketchError):
    pass


BLOCK_MODES = ("standard", "reduced")

# Estimator slack per mode, in blocks: 6 blocks fit in the error budget
# for the standard layout and 5 for the half-block rounding one.
_BLOCKS_PER_BUDGET = {"standard": 6, "reduced": 5}


def parse_epsilon(value) -> Fraction:
    """Accept 0.01, "1/128", "2^-6" or a Fraction and return an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        text = value.strip()
        if "^" in text:
            base, exp = text.split("^", 1)
            return Fraction(int(base)) ** int(exp)
        return Fraction(text).limit_denominator(1 << 40)
    return Fraction(value).limit_denominator(1 << 40)


@dataclass(frozen=True)
class SketchConfig:
    window: int
    epsilon: Fraction
    acc_levels: int = 1
    block_mode: str = "standard"

    # derived by validate_config
    eps_inv: int = 0
    block_size: int = 0
    blocks: int = 0
    max_block_events: int = 0

    @property
    def frame(self) -> int:
        """Elements per Space Saving frame (always >= window)."""
        return self.blocks * self.block_size

    @property
    def budget(self) -> Fraction:
        return self.window * self.epsilon

    @property
    def ss_capacity(self) -> int:
        return self.blocks


def validate_config(window: int, epsilon, acc_levels: int = 1,
                    block_mode: str = "standard") -> SketchConfig:
    """Check a configuration and fill in the derived constants.

    The block size is ``floor(W*eps/6)`` (``/5`` in reduced mode) and a frame
    holds ``ceil(W/s)`` blocks, which coincides with ``6/eps`` whenever
    ``W*eps/6`` is integral.  ``max_block_events`` bounds the number of
    block insertions across two frames.
    """
    if not isinstance(window, int) or window <= 0:
        raise ConfigError(f"window must be a positive integer, got {window!r}")
    eps = parse_epsilon(epsilon)
    if not 0 < eps <= 1:
        raise ConfigError(f"epsilon must lie in (0, 1], got {eps}")
    if eps.numerator != 1:
        raise NonIntegerEpsilonInverse(f"1/epsilon = {1 / eps} is not an integer")
    if block_mode not in BLOCK_MODES:
        raise ConfigError(f"unknown block mode {block_mode!r}")
    if not isinstance(acc_levels, int) or acc_levels < 1:
        raise BadAccArity(f"acc_levels must be a positive integer, got {acc_levels!r}")

    eps_inv = eps.denominator
    block_size = window // (_BLOCKS_PER_BUDGET[block_mode] * eps_inv)
    if block_size < 1:
        raise BlockTooSmall(
            f"W*eps/{_BLOCKS_PER_BUDGET[block_mode]} = "
            f"{Fraction(window, _BLOCKS_PER_BUDGET[block_mode] * eps_inv)} < 1")
    blocks = -(-window // block_size)
    return SketchConfig(window=window, epsilon=eps, acc_levels=acc_levels,
                        block_mode=block_mode, eps_inv=eps_inv,
                        block_size=block_size, blocks=blocks,
                        max_block_events=2 * blocks)


def acc_arity(blocks: int, levels: int) -> int:
    """Segment arity ``d = round(blocks ** (1/levels))``; rejects d < 2."""
    if levels == 1:
        return max(blocks, 2)
    d = round(blocks ** (1.0 / levels))
    if d < 2:
        raise BadAccArity(f"{blocks} blocks cannot be split into {levels} levels "
                          f"(arity {blocks ** (1.0 / levels):.3f} rounds below 2)")
    return d


def check_interval(i: int, j: int, limit: int, seen: int) -> None:
    if i < 0 or j < i:
        raise IndexBeyondWindow(f"need 0 <= i <= j, got i={i}, j={j}")
    if j > limit:
        raise IndexBeyondWindow(f"j={j} exceeds the window {limit}")
    if j > seen:
        raise IndexBeyondWindow(f"j={j} exceeds the {seen} elements seen so far")


class ExactOracle:
    """Ring of the last ``window`` items; answers interval counts by scanning."""

    def __init__(self, window: int):
        self.window = window
        self.buffer: deque = deque(maxlen=window)
        self.seen = 0

    def __len__(self) -> int:
        return len(self.buffer)

    def add(self, x: ItemId) -> None:
        self.buffer.append(x)
        self.seen += 1

    def extend(self, items: Iterable[ItemId]) -> None:
        for x in items:
            self.add(x)

    def interval_frequency(self, x: ItemId, i: int, j: int) -> int:
        check_interval(i, j, self.window, len(self.buffer))
        size = len(self.buffer)
        # recency r lives at buffer[size - r]
        return sum(1 for pos in range(size - j, size - i) if self.buffer[pos] == x)

    def window_frequency(self, x: ItemId, w: int) -> int:
        return self.interval_frequency(x, 0, w)

    def interval_counts(self, i: int, j: int) -> dict:
        """Exact histogram of every item at recency positions i+1..j."""
        check_interval(i, j, self.window, len(self.buffer))
        size = len(self.buffer)
        counts: dict = {}
        for pos in range(size - j, size - i):
            item = self.buffer[pos]
            counts[item] = counts.get(item, 0) + 1
        return counts


def ctz(value: int) -> int:
    """Trailing zero bits of a positive integer."""
    return (value & -value).bit_length() - 1


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def log2_floor(value: int) -> int:
    return value.bit_length() - 1


__all__ = [
    "ItemId", "SketchConfig", "ExactOracle", "validate_config", "parse_epsilon",
    "acc_arity", "check_interval", "ctz", "ceil_div", "log2_floor",
    "SketchError", "ConfigError", "NonIntegerEpsilonInverse", "BlockTooSmall",
    "BadAccArity", "IndexBeyondWindow", "BadBlockIndex", "WindowNotFull",
    "ModeChangeAfterStart", "BLOCK_MODES",
]
