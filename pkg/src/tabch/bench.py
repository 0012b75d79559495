"""Backend benchmark matrix and hash statistics."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import chisquare

from .contraction import run_preprocessing
from .graph import InputGraph
from .pqueue import ARRAY, XORHASH
from .storage import CAPACITY, CELL_BYTES
from .tabulation import TABLE_SIZE, TabulationTables, init_tables
from .tiebreak import BIAS, XOR

DEFAULT_CONFIGS = [(BIAS, ARRAY), (BIAS, XORHASH), (XOR, ARRAY), (XOR, XORHASH)]


@dataclass
class BenchRow:
    tie_breaker: str
    queue_store: str
    threads: int
    graph: str
    impl: str
    wall_seconds: float
    shortcut_count: int
    iterations: int
    peak_queue_bytes_per_core: int


def queue_bytes_per_core(store: str, n: int) -> int:
    """Index-store footprint of one worker's queue."""
    if store == XORHASH:
        return CAPACITY * CELL_BYTES
    return 8 * n  # slot + stamp, 4 bytes each


def bench(g: InputGraph, configs=None, repetitions: int = 1, threads: int = 1, seed: int = 0,
          graph_name: str = "graph", impl: str | None = None, **limits) -> list[BenchRow]:
    """Time ``run_preprocessing`` for every (tie-breaker, store) config and
    report the median wall time of ``repetitions`` runs."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows = []
    for tb_kind, store in configs or DEFAULT_CONFIGS:
        times = []
        result = None
        for _ in range(repetitions):
            start = time.perf_counter()
            result = run_preprocessing(g, threads=threads, seed=seed, tb_kind=tb_kind,
                                       store_kind=store, impl=impl, **limits)
            times.append(time.perf_counter() - start)
        rows.append(BenchRow(tb_kind, store, threads, graph_name, impl or "auto",
                             statistics.median(times), result.shortcut_count,
                             result.iteration_count, queue_bytes_per_core(store, g.node_count)))
    return rows


def format_table(rows: list[BenchRow]) -> str:
    header = ["tie_breaker", "queue_store", "threads", "impl", "wall_s", "shortcuts",
              "iterations", "bytes_per_core"]
    body = [[r.tie_breaker, r.queue_store, str(r.threads), r.impl, f"{r.wall_seconds:.3f}",
             str(r.shortcut_count), str(r.iterations), str(r.peak_queue_bytes_per_core)]
            for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines)


def to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    fields = list(BenchRow.__dataclass_fields__)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(asdict(r))
    return buf.getvalue()


# ------------------------------------------------------------- hash statistics


@dataclass
class HashStats:
    samples: int
    collision_rate: float
    chi_square: float
    chi_square_pvalue: float
    balance_fraction: float


def distinct_keys(rng: np.random.Generator, count: int) -> np.ndarray:
    keys = np.unique(rng.integers(0, 1 << 32, count, dtype=np.uint64))
    while len(keys) < count:
        extra = rng.integers(0, 1 << 32, count - len(keys), dtype=np.uint64)
        keys = np.unique(np.concatenate([keys, extra]))
    rng.shuffle(keys)
    return keys.astype(np.uint32)


def distinct_pairs(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    a = rng.integers(0, 1 << 32, count, dtype=np.uint64)
    b = rng.integers(0, 1 << 32, count, dtype=np.uint64)
    same = a == b
    while same.any():
        b[same] = rng.integers(0, 1 << 32, int(same.sum()), dtype=np.uint64)
        same = a == b
    return a.astype(np.uint32), b.astype(np.uint32)


def collision_rate(tables: TabulationTables, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean(tables.hash_many(a) == tables.hash_many(b)))


def uniformity(tables: TabulationTables, keys: np.ndarray) -> tuple[float, float]:
    counts = np.bincount(tables.hash_many(keys), minlength=TABLE_SIZE)
    res = chisquare(counts)
    return float(res.statistic), float(res.pvalue)


def balance_fraction(seeds, pairs_per_seed: int, rng: np.random.Generator) -> float:
    """Among random pairs with a preceding b under the hash order, the share
    with a < b.  Near 0.5 means the order ignores the id numbering."""
    hits = below = 0
    for seed in seeds:
        t = init_tables(int(seed))
        a, b = distinct_pairs(rng, pairs_per_seed)
        ha, hb = t.hash_many(a), t.hash_many(b)
        prec = (ha < hb) | ((ha == hb) & (a < b))
        hits += int(prec.sum())
        below += int((prec & (a < b)).sum())
    return below / hits


def hash_stats(seed: int = 0, samples: int = 1_000_000, tables: TabulationTables | None = None,
               balance_seeds: int = 10) -> HashStats:
    if samples < 10_000:
        raise ValueError("samples must be >= 10^4")
    rng = np.random.default_rng(seed)
    tables = tables if tables is not None else init_tables(seed)
    a, b = distinct_pairs(rng, samples)
    rate = collision_rate(tables, a, b)
    chi, p = uniformity(tables, distinct_keys(rng, samples))
    seeds = rng.integers(0, 1 << 63, balance_seeds)
    frac = balance_fraction(seeds, samples // balance_seeds, rng)
    return HashStats(samples, rate, chi, p, frac)
