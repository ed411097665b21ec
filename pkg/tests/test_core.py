from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from intervalsketch.core import (
    BadAccArity, BlockTooSmall, ConfigError, ExactOracle, IndexBeyondWindow,
    NonIntegerEpsilonInverse, acc_arity, ctz, parse_epsilon, validate_config,
)


def test_config_derives_block_constants():
    cfg = validate_config(1200, 0.1)
    assert (cfg.block_size, cfg.blocks, cfg.max_block_events) == (20, 60, 120)
    assert cfg.frame == 1200 and cfg.ss_capacity == 60


def test_smallest_config():
    cfg = validate_config(6, 1.0)
    assert (cfg.block_size, cfg.blocks, cfg.max_block_events) == (1, 6, 12)


def test_non_integer_inverse_rejected():
    with pytest.raises(NonIntegerEpsilonInverse):
        validate_config(100, 0.3)


def test_block_too_small():
    with pytest.raises(BlockTooSmall):
        validate_config(5, 1.0)
    with pytest.raises(BlockTooSmall):
        validate_config(100, "1/32")


def test_bad_values():
    for args in [(0, 0.5), (10, 0), (10, 1.5), (12, 0.5, 1, "fancy"), (12, 0.5, 0)]:
        with pytest.raises(ConfigError):
            validate_config(*args)


def test_non_integral_block_size_rounds_down():
    # W*eps/6 = 10.67 -> s = 10, frame of ceil(8192/10) blocks covers W
    cfg = validate_config(8192, "1/128")
    assert cfg.block_size == 10 and cfg.blocks == 820 and cfg.frame >= 8192
    assert 6 * cfg.block_size <= cfg.budget


def test_reduced_mode_constants():
    cfg = validate_config(1000, 0.1, block_mode="reduced")
    assert (cfg.block_size, cfg.blocks) == (20, 50)


def test_parse_epsilon_forms():
    assert parse_epsilon("2^-6") == Fraction(1, 64)
    assert parse_epsilon("1/128") == Fraction(1, 128)
    assert parse_epsilon(0.25) == Fraction(1, 4)


def test_acc_arity():
    assert acc_arity(64, 3) == 4
    assert acc_arity(8, 2) == 3
    assert acc_arity(60, 1) == 60
    with pytest.raises(BadAccArity):
        acc_arity(3, 3)


def test_ctz():
    assert [ctz(v) for v in (1, 2, 4, 6, 8, 12, 7)] == [0, 1, 2, 1, 3, 2, 0]


# -- oracle ----------------------------------------------------------------

def test_oracle_append_and_evict():
    o = ExactOracle(2)
    o.add("a")
    assert list(o.buffer) == ["a"]
    o.extend("bc")
    assert list(o.buffer) == ["b", "c"]
    big = ExactOracle(4)
    big.extend(range(10))
    assert len(big) == 4


def test_oracle_interval_examples():
    o = ExactOracle(4)
    o.extend("abac")
    assert o.interval_frequency("a", 0, 4) == 2
    assert o.interval_frequency("a", 1, 2) == 1
    assert o.interval_frequency("z", 0, 4) == 0


def test_oracle_rejects_beyond_window():
    o = ExactOracle(4)
    o.extend("ab")
    with pytest.raises(IndexBeyondWindow):
        o.interval_frequency("a", 0, 3)
    o.extend("cde")
    with pytest.raises(IndexBeyondWindow):
        o.interval_frequency("a", 0, 5)
    with pytest.raises(IndexBeyondWindow):
        o.interval_frequency("a", 3, 2)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=60), st.data())
def test_oracle_identities(stream, data):
    o = ExactOracle(16)
    o.extend(stream)
    n = len(o)
    i = data.draw(st.integers(0, n))
    j = data.draw(st.integers(i, n))
    total = 0
    for x in range(5):
        f = o.interval_frequency(x, i, j)
        assert f == o.interval_frequency(x, 0, j) - o.interval_frequency(x, 0, i)
        assert 0 <= f <= j - i
        total += f
    assert total == j - i
    assert sum(o.interval_counts(i, j).values()) == j - i
