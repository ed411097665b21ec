import json

import numpy as np
import pytest

from intervalsketch import make_sketch
from intervalsketch.bench import (
    TraceSource, TraceUnreadable, Workload, determinism_digest, main, parse_size,
    parse_trace, run_bench, zipf_stream,
)

REPORT_KEYS = {"config", "algo", "trace", "updates_per_sec", "queries_per_sec", "entries",
               "bytes_model", "rmse", "max_err", "sweep"}


def test_parse_trace_lines(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("a\nb\na\n")
    assert list(parse_trace(TraceSource(str(path)))) == ["a", "b", "a"]


def test_parse_trace_csv_column(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("1,x\n2,y\n")
    assert list(parse_trace(TraceSource(str(path), column=2))) == ["x", "y"]


def test_parse_trace_counts_skips(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("1,x\n\n3\n4,z\n")
    src = TraceSource(str(path), column=2)
    assert list(parse_trace(src)) == ["x", "z"]
    assert (src.records, src.skipped) == (2, 2)


def test_empty_trace(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("")
    src = TraceSource(str(path))
    assert list(parse_trace(src)) == []
    report = run_bench(64, "1/8", "hit", [], Workload(), trace_info=src.describe())
    assert report["trace"]["items"] == 0 and report["sweep"] == []


def test_unreadable_trace():
    with pytest.raises(TraceUnreadable):
        list(parse_trace(TraceSource("/nonexistent/trace.txt")))


def test_parse_size():
    assert parse_size("2^13") == 8192 and parse_size("100") == 100


def test_zipf_reproducible():
    assert zipf_stream(1.0, 1000, 500, 3) == zipf_stream(1.0, 1000, 500, 3)
    assert zipf_stream(1.0, 1000, 500, 3) != zipf_stream(1.0, 1000, 500, 4)


@pytest.mark.parametrize("algo", ["hit", "acc", "raw"])
def test_oracle_run_has_no_violations(algo):
    items = zipf_stream(1.0, 4096, 20000, seed=1)
    wl = Workload([1, 10, 50], queries=300, seed=2)
    report = run_bench(2 ** 11, "2^-5", algo, items, wl, oracle=True)
    assert set(report) == REPORT_KEYS
    assert report["config"]["violations"] == 0
    assert report["max_err"] <= 2 ** 11 / 32
    assert len(report["sweep"]) == 3


def test_report_deterministic_apart_from_timing():
    items = zipf_stream(1.0, 2048, 6000, seed=5)
    wl = Workload([1, 5], queries=200, seed=9)
    one = run_bench(1024, "1/16", "acc", items, wl, levels=2, oracle=True)
    two = run_bench(1024, "1/16", "acc", items, wl, levels=2, oracle=True)
    assert determinism_digest(one) == determinism_digest(two)


def test_more_levels_fewer_entries():
    items = zipf_stream(1.0, 65536, 30000, seed=0)
    entries = {}
    for k in (1, 8):
        sketch = make_sketch("acc", 2 ** 13, "2^-6", k)
        sketch.extend(items)
        entries[k] = sketch.live_entries()
    assert entries[8] < entries[1]


def test_hit_query_cost_grows_with_interval():
    W = 2 ** 13
    sketch = make_sketch("hit", W, "2^-6")
    sketch.extend(zipf_stream(1.0, 65536, 40000, seed=0))
    rng = np.random.default_rng(0)
    means = []
    for pct in (1, 5, 10, 15, 30, 50):
        length = round(W * pct / 100)
        total = 0
        for _ in range(500):
            i = int(rng.integers(0, W - length + 1))
            sketch.interval_query(0, i, i + length)
            total += sketch.solver.last_lookups
        means.append(total / 500)
    assert means == sorted(means)


def test_cli_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["--algo", "hit", "--epsilon", "2^-4", "--window", "2^9", "--zipf", "1.0",
                 "--universe", "500", "--count", "3000", "--oracle", "--interval-pct", "1,5,10",
                 "--queries", "100", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert set(report) == REPORT_KEYS
    assert [row["interval_pct"] for row in report["sweep"]] == [1, 5, 10]
    assert "hit" in capsys.readouterr().out


def test_cli_trace_and_bad_config(tmp_path):
    trace = tmp_path / "t.txt"
    trace.write_text("\n".join(str(k % 13) for k in range(2000)))
    assert main(["--algo", "acc", "--k", "2", "--epsilon", "1/8", "--window", "256",
                 "--trace", str(trace), "--oracle", "--out", str(tmp_path / "a.json")]) == 0
    assert main(["--algo", "acc", "--epsilon", "0.3", "--window", "256",
                 "--trace", str(trace), "--out", str(tmp_path / "b.json")]) == 2
    assert main(["--algo", "hit", "--epsilon", "1/8", "--window", "256",
                 "--trace", str(tmp_path / "missing"), "--out", str(tmp_path / "c.json")]) == 2


def test_cli_flags_bound_violation(tmp_path, monkeypatch):
    import intervalsketch.bench as bench

    real = bench.make_sketch

    def broken(*args, **kwargs):
        sketch = real(*args, **kwargs)
        honest = sketch.interval_query
        sketch.interval_query = lambda x, i, j: honest(x, i, j) - 10 ** 6
        return sketch

    monkeypatch.setattr(bench, "make_sketch", broken)
    code = main(["--algo", "hit", "--epsilon", "1/8", "--window", "256", "--zipf", "1.0",
                 "--universe", "50", "--count", "1000", "--oracle", "--queries", "20",
                 "--out", str(tmp_path / "v.json")])
    assert code == 1
