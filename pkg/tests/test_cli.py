import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from tabch.bench import BenchRow, bench, collision_rate, format_table, hash_stats, to_csv
from tabch.cli import main
from tabch.graph import load_graph
from tabch.tabulation import TABLE_SIZE, TabulationTables
from tabch.synth import geometric_graph


@pytest.fixture
def graph_file(tmp_path):
    p = tmp_path / "g.gr"
    assert main(["gen", "--nodes", "300", "--seed", "2", "--oneway", "0.2", "--out", str(p)]) == 0
    return p


@pytest.fixture
def ch_file(tmp_path, graph_file):
    p = tmp_path / "g.ch"
    assert main(["preprocess", "--graph", str(graph_file), "--threads", "2", "--out", str(p)]) == 0
    return p


def test_gen_binary(tmp_path):
    p = tmp_path / "g.bin"
    assert main(["gen", "--nodes", "50", "--out", str(p)]) == 0
    assert load_graph(p).node_count == 50


def test_query_random_and_verify(ch_file, graph_file, capsys):
    code = main(["query", "--ch", str(ch_file), "--random", "25", "--verify-against-dijkstra",
                 "--graph", str(graph_file)])
    out = capsys.readouterr()
    assert code == 0
    lines = out.out.splitlines()
    assert len(lines) == 25
    s, t, d = lines[0].split()
    assert 0 <= int(s) < 300 and 0 <= int(t) < 300
    assert "verified 25" in out.err


def test_query_pairs_file(tmp_path, ch_file, capsys):
    pairs = tmp_path / "pairs.txt"
    pairs.write_text("# s t\n0 0\n0 299\n")
    assert main(["query", "--ch", str(ch_file), "--pairs", str(pairs)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "0 0 0" and lines[1].startswith("0 299 ")


def test_verify_ok(ch_file, graph_file, capsys):
    assert main(["verify", "--graph", str(graph_file), "--ch", str(ch_file), "--random", "50"]) == 0
    assert "50 queries match" in capsys.readouterr().out


@pytest.mark.parametrize("tb, store", [("bias", "array"), ("xor", "xorhash")])
def test_preprocess_options(tmp_path, graph_file, tb, store):
    out = tmp_path / "x.ch"
    args = ["preprocess", "--graph", str(graph_file), "--tie-breaker", tb, "--queue-store", store,
            "--sim-limit", "50", "--contract-limit", "80", "--seed", "3", "--out", str(out)]
    assert main(args) == 0 and out.exists()


def test_usage_errors(capsys, graph_file):
    capsys.readouterr()
    assert main([]) == 1
    assert main(["preprocess", "--graph", str(graph_file)]) == 1
    assert main(["preprocess", "--graph", str(graph_file), "--out", "x", "--tie-breaker", "rand"]) == 1
    assert main(["query", "--ch", "whatever"]) in (1, 2)
    assert main(["hash-stats", "--samples", "10"]) == 1
    assert main(["bench", "--graph", str(graph_file), "--configs", "xor-array"]) == 1
    assert main(["gen", "--nodes", "10", "--threads", "0", "--out", "x"]) == 1
    err = capsys.readouterr().err
    assert all(line.startswith("error: ") for line in err.splitlines())


def test_data_errors(tmp_path, ch_file, capsys):
    assert main(["preprocess", "--graph", str(tmp_path / "missing.gr"), "--out", "x"]) == 2
    bad = tmp_path / "bad.gr"
    bad.write_text("p sp 2 1\na 1 7 1\n")
    assert main(["preprocess", "--graph", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "id out of range" in capsys.readouterr().err
    pairs = tmp_path / "pairs.txt"
    pairs.write_text("0 100000\n")
    assert main(["query", "--ch", str(ch_file), "--pairs", str(pairs)]) == 2
    assert main(["query", "--ch", str(bad), "--random", "1"]) == 2


def test_invariant_violation(tmp_path, ch_file, capsys):
    # verify against a different graph with the same node count
    other = tmp_path / "other.gr"
    assert main(["gen", "--nodes", "300", "--seed", "99", "--out", str(other)]) == 0
    code = main(["verify", "--graph", str(other), "--ch", str(ch_file), "--random", "50"])
    assert code == 3
    assert "mismatches" in capsys.readouterr().err


def test_bench_command(tmp_path, graph_file, capsys):
    out_csv = tmp_path / "b.csv"
    code = main(["bench", "--graph", str(graph_file), "--configs", "bias/array,xor/xorhash",
                 "--impl", "both", "--csv", str(out_csv)])
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert {r["tie_breaker"] for r in rows} == {"bias", "xor"}
    assert all(r["peak_queue_bytes_per_core"] == "393216" for r in rows if r["queue_store"] == "xorhash")


def test_hash_stats_command(capsys):
    assert main(["hash-stats", "--samples", "20000", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert "collision_rate" in out and "balance_fraction" in out


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "tabch.cli", "gen"], capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stderr.count("\n") == 1


# ------------------------------------------------------------------ bench api

def test_bench_rows_and_median(monkeypatch):
    import tabch.bench as bm
    ticks = iter([0.0, 1.0, 1.0, 4.0, 4.0, 6.0])  # durations 1, 3, 2
    monkeypatch.setattr(bm.time, "perf_counter", lambda: next(ticks))
    g = geometric_graph(60, 1)
    rows = bench(g, [("xor", "xorhash")], repetitions=3)
    assert rows[0].wall_seconds == 2.0


def test_bench_matrix_groups():
    g = geometric_graph(2000, 3)
    rows = bench(g, repetitions=1)
    assert len(rows) == 4
    by_tb = {}
    for r in rows:
        by_tb.setdefault(r.tie_breaker, set()).add(r.shortcut_count)
    assert all(len(v) == 1 for v in by_tb.values())
    sizes = {r.queue_store: r.peak_queue_bytes_per_core for r in rows}
    assert sizes == {"xorhash": 393216, "array": 8 * 2000}


def test_csv_schema_stable():
    row = BenchRow("xor", "xorhash", 1, "g", "auto", 0.5, 10, 3, 393216)
    text = to_csv([row])
    assert text.splitlines()[0] == ("tie_breaker,queue_store,threads,graph,impl,wall_seconds,"
                                   "shortcut_count,iterations,peak_queue_bytes_per_core")
    assert "393216" in format_table([row])


def test_degenerate_table_collides():
    zeros = np.zeros(TABLE_SIZE, np.uint16)
    t = TabulationTables(zeros, zeros.copy())
    a = np.arange(1000, dtype=np.uint32)
    assert collision_rate(t, a, a + 1) == 1.0
    assert hash_stats(0, 10_000, tables=t).collision_rate == 1.0


def test_hash_stats_small_samples():
    with pytest.raises(ValueError):
        hash_stats(0, 9_999)
