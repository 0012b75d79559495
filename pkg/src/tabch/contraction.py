"""Parallel contraction hierarchy preprocessing.

One iteration of the engine:

1. select every remaining node that is smaller, under (priority, tie-breaker),
   than every remaining node within two undirected hops;
2. rank the selected nodes by ascending (priority, tie-breaker);
3. for each of them, in parallel, run witness searches and collect the
   shortcut arcs it needs (members are flagged contracted first, so no
   search walks through any of them);
4. unlink the members and insert their shortcuts (members are >= 3 hops
   apart, so they touch disjoint edge lists);
5. re-simulate the neighbours of the members.

The compiled engine in ``tabch._core`` implements the same steps with the same
tie rules and produces byte-identical results.  ``run_preprocessing`` picks it
when it is importable.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import (
    BACKWARD,
    FORWARD,
    INF,
    SHORTCUT,
    ContractionGraph,
    InputGraph,
    build_contraction_graph,
    insert_arc,
    overlay_entries,
)
from .pqueue import ARRAY, STORE_KINDS, XORHASH, MinHeap, make_index_store
from .storage import StorageFullError
from .tabulation import TabulationTables, init_tables
from .tiebreak import BIAS, INCONSISTENT, XOR, TieBreaker, make_tie_breaker

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

SIM_LIMIT = 1000
CONTRACT_LIMIT = 2000


class InconsistentTieBreakerError(RuntimeError):
    """Independent-set selection made no progress on a non-empty graph."""


@dataclass(frozen=True)
class PriorityCoefficients:
    edge_difference: int = 4
    deleted_neighbors: int = 1
    originals: int = 1


DEFAULT_COEFFICIENTS = PriorityCoefficients()


@dataclass
class NodePriority:
    edge_difference: int
    deleted_neighbors: int
    originals: int
    composite: int

    @classmethod
    def combine(cls, ed: int, deleted: int, originals: int,
                coef: PriorityCoefficients = DEFAULT_COEFFICIENTS) -> "NodePriority":
        composite = (coef.edge_difference * ed + coef.deleted_neighbors * deleted
                     + coef.originals * originals)
        return cls(ed, deleted, originals, composite)


SHORTCUT_DTYPE = np.dtype(
    [("u", "<u4"), ("w", "<u4"), ("weight", "<u8"), ("middle", "<i4"), ("flags", "u1")]
)
_RESULT_HEADER = struct.Struct("<4sBxxxIQI")


class CHResult:
    """Contraction order plus the shortcut arcs inserted along the way.

    ``level[v]`` is the iteration in which ``v`` was contracted; shortcut
    records are listed in insertion order.
    """

    MAGIC = b"TCHR"
    VERSION = 1

    def __init__(self, rank, level, shortcuts, iteration_count: int):
        self.rank = np.asarray(rank, dtype=np.uint32)
        self.level = np.asarray(level, dtype=np.uint32)
        if isinstance(shortcuts, np.ndarray) and shortcuts.dtype == SHORTCUT_DTYPE:
            self.shortcuts = shortcuts
        else:
            rows = [tuple(s) for s in shortcuts]
            self.shortcuts = np.array(rows, dtype=SHORTCUT_DTYPE) if rows else np.zeros(0, SHORTCUT_DTYPE)
        self.iteration_count = int(iteration_count)

    @property
    def node_count(self) -> int:
        return len(self.rank)

    @property
    def shortcut_count(self) -> int:
        return len(self.shortcuts)

    def to_bytes(self) -> bytes:
        head = _RESULT_HEADER.pack(self.MAGIC, self.VERSION, self.node_count,
                                   self.shortcut_count, self.iteration_count)
        return b"".join([head, self.rank.astype("<u4").tobytes(),
                         self.level.astype("<u4").tobytes(), self.shortcuts.tobytes()])

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple["CHResult", int]:
        magic, version, n, k, iters = _RESULT_HEADER.unpack_from(data, offset)
        if magic != cls.MAGIC or version != cls.VERSION:
            raise ValueError("not a CH result block")
        off = offset + _RESULT_HEADER.size
        rank = np.frombuffer(data, "<u4", n, off).copy()
        off += 4 * n
        level = np.frombuffer(data, "<u4", n, off).copy()
        off += 4 * n
        sc = np.frombuffer(data, SHORTCUT_DTYPE, k, off).copy()
        off += SHORTCUT_DTYPE.itemsize * k
        return cls(rank, level, sc, iters), off

    def __eq__(self, other):
        if not isinstance(other, CHResult):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    def __repr__(self):
        return (f"CHResult(n={self.node_count}, shortcuts={self.shortcut_count}, "
                f"iterations={self.iteration_count})")


# ------------------------------------------------------------------ searches


def witness_search(g: ContractionGraph, source: int, excluded: int, targets,
                   upper_bound: int, node_limit: int, q: MinHeap) -> dict[int, int]:
    """Bounded Dijkstra from ``source`` over non-contracted nodes, never
    entering ``excluded``.  Returns the settled distance of every target, or
    INF for targets that were not settled before a stopping rule fired."""
    result = dict.fromkeys(targets, INF)
    left = len(result)
    if not left:
        return result
    q.reset()
    q.push_or_decrease(source, 0)
    adj, contracted = g.adj, g.contracted
    push, pop = q.push_or_decrease, q.pop_min
    settled = 0
    while q.nodes:
        node, d = pop()
        if d > upper_bound:
            break
        settled += 1
        if node in result:
            result[node] = d
            left -= 1
            if not left:
                break
        if settled >= node_limit:
            break
        for e in adj[node]:
            if e[2] & FORWARD:
                t = e[0]
                if t != excluded and not contracted[t]:
                    push(t, d + e[1])
    return result


def needed_arcs(g: ContractionGraph, v: int, q: MinHeap, node_limit: int) -> list[tuple[int, int, int, int]]:
    """Shortcut arcs ``(u, w, weight, originals)`` that removing ``v`` requires."""
    lst = g.adj[v]
    ins = [(e[0], e[1], e[4]) for e in lst if e[2] & BACKWARD]
    outs = [(e[0], e[1], e[4]) for e in lst if e[2] & FORWARD]
    arcs = []
    for u, cu, ou in ins:
        targets = [w for w, _, _ in outs if w != u]
        if not targets:
            continue
        upper = cu + max(cw for w, cw, _ in outs if w != u)
        dist = witness_search(g, u, v, targets, upper, node_limit, q)
        for w, cw, ow in outs:
            if w != u and dist[w] > cu + cw:
                arcs.append((u, w, cu + cw, ou + ow))
    return arcs


def simulate(g: ContractionGraph, v: int, q: MinHeap, *, node_limit: int = SIM_LIMIT,
             deleted_neighbors: int = 0,
             coefficients: PriorityCoefficients = DEFAULT_COEFFICIENTS) -> NodePriority:
    """Priority of ``v`` from a dry-run contraction; ``g`` is left untouched."""
    groups = {(min(u, w), max(u, w), c) for u, w, c, _ in needed_arcs(g, v, q, node_limit)}
    lst = g.adj[v]
    ed = len(groups) - len(lst)
    originals = sum(e[4] for e in lst if e[2] & SHORTCUT)
    return NodePriority.combine(ed, deleted_neighbors, originals, coefficients)


def contract(g: ContractionGraph, v: int, q: MinHeap, node_limit: int = CONTRACT_LIMIT) -> list[tuple]:
    """Contract ``v``: insert the shortcuts it needs, then unlink it.

    Returns ``(u, w, weight, middle, flags)`` for every arc that changed the
    overlay.
    """
    if g.contracted[v]:
        raise ValueError(f"node {v} already contracted")
    arcs = needed_arcs(g, v, q, node_limit)
    g.mark_contracted(v)
    inserted = []
    for u, w, c, o in arcs:
        if insert_arc(g, u, w, c, v, o):
            inserted.append((u, w, c, v, FORWARD))
    return inserted


def _smaller(prio, tb: TieBreaker, v: int, u: int) -> bool:
    pv, pu = prio[v], prio[u]
    return pv < pu or (pv == pu and tb.precedes(v, u))


def is_local_minimum(g: ContractionGraph, prio, tb: TieBreaker, v: int) -> bool:
    adj = g.adj
    if tb.consistent:
        key = tb.key
        mine = (prio[v], key(v))
        for e in adj[v]:
            x = e[0]
            if (prio[x], key(x)) <= mine:
                return False
            for e2 in adj[x]:
                y = e2[0]
                if y != v and (prio[y], key(y)) <= mine:
                    return False
        return True
    for e in adj[v]:
        x = e[0]
        if not _smaller(prio, tb, v, x):
            return False
        for e2 in adj[x]:
            y = e2[0]
            if y != v and not _smaller(prio, tb, v, y):
                return False
    return True


def select_independent_set(g: ContractionGraph, priorities, tb: TieBreaker, nodes=None) -> list[int]:
    """Remaining nodes that are strictly smaller than every remaining node
    within two undirected hops, in ascending id order."""
    if nodes is None:
        nodes = [v for v in range(g.n) if not g.contracted[v]]
    return [v for v in nodes if is_local_minimum(g, priorities, tb, v)]


# --------------------------------------------------------------------- engine


def _chunks(items: list, parts: int) -> list[list]:
    size, extra = divmod(len(items), parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        out.append(items[start:stop])
        start = stop
    return out


class _Workers:
    """Fixed pool; worker ``i`` always uses queue ``i`` and results come back
    in item order regardless of scheduling."""

    def __init__(self, queues: list[MinHeap]):
        self.queues = queues
        self.pool = ThreadPoolExecutor(len(queues)) if len(queues) > 1 else None

    def map(self, fn, items: list) -> list:
        if self.pool is None:
            q = self.queues[0]
            return [fn(q, x) for x in items]
        chunks = _chunks(items, len(self.queues))
        futures = [self.pool.submit(lambda q, c: [fn(q, x) for x in c], q, chunk)
                   for q, chunk in zip(self.queues, chunks)]
        out = []
        for fut in futures:
            out.extend(fut.result())
        return out

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _run_pure(g: InputGraph, tb: TieBreaker, threads: int, store_kind: str,
              tables: TabulationTables, sim_limit: int, contract_limit: int,
              coef: PriorityCoefficients, observer=None) -> CHResult:
    n = g.node_count
    cg = build_contraction_graph(g)
    workers = _Workers([MinHeap(make_index_store(store_kind, n, tables)) for _ in range(threads)])
    deleted = [0] * n
    rank = [0] * n
    level = [0] * n
    shortcuts: list[tuple] = []

    def priority(q, x):
        return simulate(cg, x, q, node_limit=sim_limit, deleted_neighbors=deleted[x],
                        coefficients=coef).composite

    def arcs_of(q, v):
        return needed_arcs(cg, v, q, contract_limit)

    try:
        prio = workers.map(priority, list(range(n)))
        remaining = list(range(n))
        next_rank = 0
        iteration = 0
        while remaining:
            members = select_independent_set(cg, prio, tb, remaining)
            if not members:
                raise InconsistentTieBreakerError(
                    f"inconsistent tie-breaker: no node selected among {len(remaining)} remaining")
            if observer is not None:
                observer("selected", iteration, cg, members)
            key = tb.key
            members.sort(key=lambda v: (prio[v], key(v)))
            for v in members:
                rank[v] = next_rank
                level[v] = iteration
                next_rank += 1
                cg.contracted[v] = 1
            per_member = workers.map(arcs_of, members)
            dirty = []
            for v, arcs in zip(members, per_member):
                nbrs = cg.mark_contracted(v)
                for x in nbrs:
                    deleted[x] += 1
                dirty.extend(nbrs)
                for u, w, c, o in arcs:
                    if insert_arc(cg, u, w, c, v, o):
                        shortcuts.append((u, w, c, v, FORWARD))
            for x, p in zip(dirty, workers.map(priority, dirty)):
                prio[x] = p
            remaining = [v for v in remaining if not cg.contracted[v]]
            if observer is not None:
                observer("applied", iteration, cg, members)
            iteration += 1
    finally:
        workers.close()
    return CHResult(rank, level, shortcuts, iteration)


_TB_CODES = {BIAS: 0, XOR: 1}
_STORE_CODES = {ARRAY: 0, XORHASH: 1}


def _run_compiled(g: InputGraph, tb: TieBreaker, threads: int, store_kind: str,
                  tables: TabulationTables, sim_limit: int, contract_limit: int,
                  coef: PriorityCoefficients) -> CHResult:
    offsets, tgt, wt, fl = overlay_entries(g)
    bias = tb.values if tb.kind == BIAS else np.zeros(1, np.uint32)
    try:
        rank, level, su, sw, sweight, smid, iters = _core.preprocess(
            g.node_count, offsets, tgt, wt, fl,
            _TB_CODES[tb.kind], np.ascontiguousarray(bias, dtype=np.uint32),
            tables.t0, tables.t1, _STORE_CODES[store_kind], threads,
            sim_limit, contract_limit,
            coef.edge_difference, coef.deleted_neighbors, coef.originals)
    except _core.CoreStorageFull as exc:
        raise StorageFullError(str(exc)) from None
    except _core.CoreNoProgress as exc:
        raise InconsistentTieBreakerError(str(exc)) from None
    sc = np.zeros(len(su), SHORTCUT_DTYPE)
    sc["u"], sc["w"], sc["weight"], sc["middle"] = su, sw, sweight, smid
    sc["flags"] = FORWARD
    return CHResult(rank, level, sc, iters)


def available_impls() -> list[str]:
    return ["compiled", "pure"] if _core is not None else ["pure"]


def default_impl() -> str:
    forced = os.environ.get("TABCH_IMPL", "").strip().lower()
    if forced in ("pure", "compiled"):
        return forced
    return "compiled" if _core is not None else "pure"


def run_preprocessing(g: InputGraph, threads: int = 1, seed: int = 0, tb_kind: str = XOR,
                      store_kind: str = XORHASH, *, sim_limit: int = SIM_LIMIT,
                      contract_limit: int = CONTRACT_LIMIT,
                      coefficients: PriorityCoefficients = DEFAULT_COEFFICIENTS,
                      impl: str | None = None, tie_breaker: TieBreaker | None = None,
                      observer=None) -> CHResult:
    """Contract every node of ``g``.  The result depends only on the graph, the
    seed, the tie-breaker kind and the limits, never on ``threads``, the queue
    store or the implementation.

    ``observer(event, iteration, graph, members)`` is a test hook (pure engine
    only), called with ``"selected"`` before and ``"applied"`` after each
    iteration's contraction.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if store_kind not in STORE_KINDS:
        raise ValueError(f"unknown queue store {store_kind!r}; expected one of {STORE_KINDS}")
    if sim_limit < 1 or contract_limit < 1:
        raise ValueError("search limits must be >= 1")
    tables = init_tables(seed)
    tb = tie_breaker if tie_breaker is not None else make_tie_breaker(tb_kind, g.node_count, seed, tables)
    impl = impl or default_impl()
    if observer is not None:
        impl = "pure"
    if impl == "compiled":
        if _core is None:
            raise RuntimeError("compiled core not available; build the extension or use impl='pure'")
        if tb.kind == INCONSISTENT:
            raise ValueError("the inconsistent test tie-breaker is only supported by impl='pure'")
        return _run_compiled(g, tb, threads, store_kind, tables, sim_limit, contract_limit, coefficients)
    if impl != "pure":
        raise ValueError(f"unknown implementation {impl!r}")
    return _run_pure(g, tb, threads, store_kind, tables, sim_limit, contract_limit, coefficients,
                     observer)
