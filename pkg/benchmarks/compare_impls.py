"""Time the compiled core against the pure-Python engine.

    python benchmarks/compare_impls.py --nodes 2000 5000 --threads 1 2

Both engines must produce byte-identical results; the script checks that and
prints one row per (nodes, threads) with the speedup.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

from tabch.contraction import available_impls, run_preprocessing
from tabch.synth import geometric_graph


def timed(g, impl, threads, repetitions, **kw):
    times, result = [], None
    for _ in range(repetitions):
        start = time.perf_counter()
        result = run_preprocessing(g, threads=threads, impl=impl, **kw)
        times.append(time.perf_counter() - start)
    return statistics.median(times), result


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nodes", type=int, nargs="+", default=[1000, 5000])
    p.add_argument("--threads", type=int, nargs="+", default=[1])
    p.add_argument("--tie-breaker", default="xor", choices=["bias", "xor"])
    p.add_argument("--queue-store", default="xorhash", choices=["array", "xorhash"])
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    if "compiled" not in available_impls():
        print("compiled core not built; nothing to compare", file=sys.stderr)
        return 1
    kw = dict(seed=args.seed, tb_kind=args.tie_breaker, store_kind=args.queue_store)
    print(f"{'nodes':>7} {'arcs':>8} {'threads':>7} {'pure_s':>9} {'compiled_s':>10} {'speedup':>8}")
    for n in args.nodes:
        g = geometric_graph(n, args.seed)
        arcs = len(g.arcs()[0])
        for t in args.threads:
            slow, a = timed(g, "pure", t, args.repetitions, **kw)
            fast, b = timed(g, "compiled", t, args.repetitions, **kw)
            if a != b:
                print(f"results differ at n={n} threads={t}", file=sys.stderr)
                return 3
            print(f"{n:>7} {arcs:>8} {t:>7} {slow:>9.3f} {fast:>10.3f} {slow / fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
