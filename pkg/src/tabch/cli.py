"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 data error (missing/malformed input),
3 internal invariant violation (e.g. a verification mismatch).
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from . import bench as benchmod
from .contraction import (
    CONTRACT_LIMIT,
    SIM_LIMIT,
    InconsistentTieBreakerError,
    available_impls,
    run_preprocessing,
)
from .graph import GraphFormatError, load_graph, save_graph
from .pqueue import STORE_KINDS
from .query import build_ch_graph, dijkstra_oracle, load_ch, query, save_ch
from .storage import StorageFullError
from .synth import geometric_graph
from .tiebreak import KINDS

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class InvariantError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _load(path):
    try:
        return load_graph(path)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except (GraphFormatError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _load_ch(path):
    try:
        return load_ch(path)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except GraphFormatError as exc:
        raise DataError(f"{path}: {exc}") from None


def _read_pairs(path, n):
    pairs = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts or parts[0].startswith("#"):
                    continue
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 's t'")
                s, t = int(parts[0]), int(parts[1])
                if not (0 <= s < n and 0 <= t < n):
                    raise DataError(f"{path}:{lineno}: node id out of range [0, {n})")
                pairs.append((s, t))
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except ValueError:
        raise DataError(f"{path}: non-integer node id") from None
    return pairs


def _random_pairs(n, k, seed):
    rng = random.Random(seed)
    return [(rng.randrange(n), rng.randrange(n)) for _ in range(k)]


def _fmt(d):
    return "inf" if d is None else str(d)


# ---------------------------------------------------------------- commands


def cmd_gen(args):
    g = geometric_graph(args.nodes, args.seed, neighbors=args.neighbors, oneway=args.oneway)
    save_graph(g, args.out)
    print(f"wrote {args.out}: n={g.node_count} edges={g.edge_count}", file=sys.stderr)


def cmd_preprocess(args):
    g = _load(args.graph)
    start = time.perf_counter()
    r = run_preprocessing(g, threads=args.threads, seed=args.seed, tb_kind=args.tie_breaker,
                          store_kind=args.queue_store, sim_limit=args.sim_limit,
                          contract_limit=args.contract_limit, impl=args.impl)
    elapsed = time.perf_counter() - start
    save_ch(args.out, g, r)
    print(f"n={g.node_count} shortcuts={r.shortcut_count} iterations={r.iteration_count} "
          f"seconds={elapsed:.3f}", file=sys.stderr)


def _query_pairs(args, n):
    if args.pairs:
        return _read_pairs(args.pairs, n)
    return _random_pairs(n, args.random, args.seed)


def _verify(ch, g, pairs):
    adj = g.adjacency()
    bad = []
    for s, t in pairs:
        d = query(ch, s, t)
        o = dijkstra_oracle(g, s, t, adj)
        if d != o:
            bad.append((s, t, d, o))
    return bad


def cmd_query(args):
    stored, r = _load_ch(args.ch)
    ch = build_ch_graph(stored, r)
    if args.pairs is None and args.random is None:
        raise UsageError("query: give --pairs FILE or --random K")
    pairs = _query_pairs(args, stored.node_count)
    out = sys.stdout
    for s, t in pairs:
        out.write(f"{s} {t} {_fmt(query(ch, s, t))}\n")
    if args.verify_against_dijkstra:
        g = _load(args.graph) if args.graph else stored
        if g.node_count != stored.node_count:
            raise DataError("graph and CH file disagree on node count")
        bad = _verify(ch, g, pairs)
        if bad:
            s, t, d, o = bad[0]
            raise InvariantError(f"{len(bad)} mismatches; first: {s} {t} ch={_fmt(d)} dijkstra={_fmt(o)}")
        print(f"verified {len(pairs)} queries against Dijkstra", file=sys.stderr)


def cmd_verify(args):
    g = _load(args.graph)
    stored, r = _load_ch(args.ch)
    if g.node_count != stored.node_count:
        raise DataError("graph and CH file disagree on node count")
    ch = build_ch_graph(stored, r)
    if not ch.is_dag():
        raise InvariantError("search graph is not rank-ordered")
    pairs = _random_pairs(g.node_count, args.random, args.seed)
    bad = _verify(ch, g, pairs)
    if bad:
        s, t, d, o = bad[0]
        raise InvariantError(f"{len(bad)} mismatches; first: {s} {t} ch={_fmt(d)} dijkstra={_fmt(o)}")
    print(f"ok: {len(pairs)} queries match Dijkstra")


def _parse_configs(text):
    configs = []
    for item in text.split(","):
        try:
            tb, store = item.split("/")
        except ValueError:
            raise UsageError(f"bad config {item!r}; expected TIE/STORE, e.g. xor/xorhash") from None
        if tb not in KINDS or store not in STORE_KINDS:
            raise UsageError(f"bad config {item!r}")
        configs.append((tb, store))
    return configs


def cmd_bench(args):
    if args.graph:
        g = _load(args.graph)
        name = args.graph
    else:
        g = geometric_graph(args.gen_nodes, args.seed)
        name = f"synthetic-{args.gen_nodes}"
    configs = _parse_configs(args.configs) if args.configs else None
    impls = available_impls() if args.impl == "both" else [args.impl]
    rows = []
    for impl in impls:
        rows += benchmod.bench(g, configs, args.repetitions, threads=args.threads, seed=args.seed,
                               graph_name=name, impl=None if impl == "auto" else impl,
                               sim_limit=args.sim_limit, contract_limit=args.contract_limit)
    print(benchmod.format_table(rows))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(benchmod.to_csv(rows))


def cmd_hash_stats(args):
    try:
        st = benchmod.hash_stats(args.seed, args.samples)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"samples            {st.samples}")
    print(f"collision_rate     {st.collision_rate:.3e}  (2^-16 = {2**-16:.3e})")
    print(f"chi_square         {st.chi_square:.1f}  p={st.chi_square_pvalue:.4f}")
    print(f"balance_fraction   {st.balance_fraction:.4f}")


# ------------------------------------------------------------------ parser


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    limits = _Parser(add_help=False)
    limits.add_argument("--sim-limit", type=int, default=SIM_LIMIT)
    limits.add_argument("--contract-limit", type=int, default=CONTRACT_LIMIT)

    p = _Parser(prog="tabch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("gen", parents=[common], help="write a synthetic road-like graph")
    s.add_argument("--nodes", type=int, required=True)
    s.add_argument("--neighbors", type=int, default=3)
    s.add_argument("--oneway", type=float, default=0.0)
    s.add_argument("--out", required=True, help=".gr for DIMACS text, anything else for binary")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("preprocess", parents=[common, limits], help="build a hierarchy")
    s.add_argument("--graph", required=True)
    s.add_argument("--tie-breaker", choices=KINDS, default="xor")
    s.add_argument("--queue-store", choices=STORE_KINDS, default="xorhash")
    s.add_argument("--impl", choices=["compiled", "pure"], default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("query", parents=[common], help="answer s-t queries (0-based ids)")
    s.add_argument("--ch", required=True)
    s.add_argument("--pairs")
    s.add_argument("--random", type=int)
    s.add_argument("--verify-against-dijkstra", action="store_true")
    s.add_argument("--graph", help="original graph for verification (default: arcs in the CH file)")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("verify", parents=[common], help="compare random queries with Dijkstra")
    s.add_argument("--graph", required=True)
    s.add_argument("--ch", required=True)
    s.add_argument("--random", type=int, default=1000)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", parents=[common, limits], help="time the backend matrix")
    s.add_argument("--graph")
    s.add_argument("--gen-nodes", type=int, default=20_000)
    s.add_argument("--configs", help="comma list of TIE/STORE, default all four")
    s.add_argument("--repetitions", type=int, default=1)
    s.add_argument("--impl", choices=["auto", "compiled", "pure", "both"], default="auto")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("hash-stats", parents=[common], help="tabulation hash statistics")
    s.add_argument("--samples", type=int, default=1_000_000)
    s.set_defaults(func=cmd_hash_stats)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("tabch: a subcommand is required (see --help)")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvariantError, InconsistentTieBreakerError, StorageFullError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
