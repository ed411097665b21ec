"""Interval frequency and heavy-hitter sketches over the last W stream elements."""

from __future__ import annotations

from .acc import AccSketch
from .core import (
    BadAccArity, BadBlockIndex, BlockTooSmall, ConfigError, ExactOracle,
    IndexBeyondWindow, ModeChangeAfterStart, NonIntegerEpsilonInverse,
    SketchConfig, SketchError, WindowNotFull, parse_epsilon, validate_config,
)
from .fixed_window import FixedWindowEstimator
from .hit import HitSketch
from .raw import RawSketch
from .reduction import HeavyHitters, Interner, ReductionSketch, make_solver
from .space_saving import SpaceSaving

__version__ = "0.1.0"


def make_sketch(algo: str, window: int, epsilon, levels: int = 1,
                block_mode: str = "standard", **kwargs):
    """Build a sketch by name: ``raw``, ``acc`` or ``hit``."""
    if algo == "raw":
        return RawSketch(window, epsilon, **kwargs)
    if algo in ("acc", "hit"):
        return ReductionSketch.build(window, epsilon, algo, levels, block_mode, **kwargs)
    raise ConfigError(f"unknown algorithm {algo!r}")


__all__ = [
    "AccSketch", "ExactOracle", "FixedWindowEstimator", "HeavyHitters", "HitSketch",
    "Interner", "RawSketch", "ReductionSketch", "SketchConfig", "SpaceSaving",
    "make_sketch", "make_solver", "parse_epsilon", "validate_config",
    "SketchError", "ConfigError", "NonIntegerEpsilonInverse", "BlockTooSmall",
    "BadAccArity", "IndexBeyondWindow", "BadBlockIndex", "WindowNotFull",
    "ModeChangeAfterStart",
]
