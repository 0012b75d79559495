"""Hierarchy queries, path unpacking and the plain Dijkstra baseline."""

from __future__ import annotations

import heapq
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .contraction import CHResult
from .graph import GraphFormatError, InputGraph

UNREACHABLE = None


@dataclass
class CHGraph:
    """Upward/downward search graph in CSR form.

    ``up`` lists, for each node, arcs node->y with rank(y) > rank(node);
    ``down`` lists arcs y->node with rank(y) > rank(node), stored at the lower
    endpoint so the backward search can walk them in reverse.  Middle is -1
    for original arcs.
    """

    rank: np.ndarray
    up_offsets: np.ndarray
    up_targets: np.ndarray
    up_weights: np.ndarray
    up_middle: np.ndarray
    down_offsets: np.ndarray
    down_targets: np.ndarray
    down_weights: np.ndarray
    down_middle: np.ndarray
    _lists: tuple = field(default=None, repr=False)
    _arc_index: dict = field(default=None, repr=False)

    @property
    def node_count(self) -> int:
        return len(self.rank)

    @property
    def edge_count(self) -> int:
        return len(self.up_targets) + len(self.down_targets)

    def lists(self):
        if self._lists is None:
            def split(off, tgt, wt):
                off, tgt, wt = off.tolist(), tgt.tolist(), wt.tolist()
                return [list(zip(tgt[off[i]:off[i + 1]], wt[off[i]:off[i + 1]]))
                        for i in range(len(off) - 1)]
            self._lists = (split(self.up_offsets, self.up_targets, self.up_weights),
                           split(self.down_offsets, self.down_targets, self.down_weights))
        return self._lists

    def arc(self, a: int, b: int) -> tuple[int, int]:
        """(weight, middle) of the stored arc a->b."""
        if self._arc_index is None:
            index = {}
            for x in range(self.node_count):
                for i in range(self.up_offsets[x], self.up_offsets[x + 1]):
                    index[(x, int(self.up_targets[i]))] = (int(self.up_weights[i]), int(self.up_middle[i]))
                for i in range(self.down_offsets[x], self.down_offsets[x + 1]):
                    index[(int(self.down_targets[i]), x)] = (int(self.down_weights[i]), int(self.down_middle[i]))
            self._arc_index = index
        return self._arc_index[(a, b)]

    def is_dag(self) -> bool:
        r = self.rank.astype(np.int64)
        owners_up = np.repeat(np.arange(self.node_count), np.diff(self.up_offsets))
        owners_dn = np.repeat(np.arange(self.node_count), np.diff(self.down_offsets))
        return bool(np.all(r[owners_up] < r[self.up_targets])
                    and np.all(r[owners_dn] < r[self.down_targets]))


def _csr(n, owner, target, weight, middle):
    order = np.lexsort((weight, target, owner))
    owner, target, weight, middle = owner[order], target[order], weight[order], middle[order]
    if len(owner):
        first = np.ones(len(owner), dtype=bool)
        first[1:] = (owner[1:] != owner[:-1]) | (target[1:] != target[:-1])
        owner, target, weight, middle = owner[first], target[first], weight[first], middle[first]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, owner + 1, 1)
    np.cumsum(offsets, out=offsets)
    return offsets, target.astype(np.int64), weight.astype(np.int64), middle.astype(np.int64)


def build_ch_graph(g: InputGraph, r: CHResult) -> CHGraph:
    n = g.node_count
    rank = r.rank.astype(np.int64)
    if n and not np.array_equal(np.sort(rank), np.arange(n)):
        raise ValueError("rank is not a permutation")
    src, dst, w = g.arcs()
    sc = r.shortcuts
    tail = np.concatenate([src, sc["u"].astype(np.int64)])
    head = np.concatenate([dst, sc["w"].astype(np.int64)])
    wt = np.concatenate([w, sc["weight"].astype(np.int64)])
    mid = np.concatenate([np.full(len(src), -1, np.int64), sc["middle"].astype(np.int64)])
    upward = rank[tail] < rank[head]
    dn = ~upward
    up = _csr(n, tail[upward], head[upward], wt[upward], mid[upward])
    down = _csr(n, head[dn], tail[dn], wt[dn], mid[dn])
    return CHGraph(r.rank.astype(np.uint32), *up, *down)


@dataclass
class QueryResult:
    distance: int | None
    meeting: int | None = None
    fwd_parent: dict = field(default_factory=dict, repr=False)
    bwd_parent: dict = field(default_factory=dict, repr=False)


def query_full(ch: CHGraph, s: int, t: int) -> QueryResult:
    """Bidirectional search: forward over upward arcs from ``s``, backward over
    downward arcs from ``t``.  Each direction stops once its queue minimum
    reaches the best meeting distance."""
    if s == t:
        return QueryResult(0, s, {s: None}, {t: None})
    up, down = ch.lists()
    dist = ({s: 0}, {t: 0})
    parent = ({s: None}, {t: None})
    heaps = ([(0, s)], [(0, t)])
    settled = (set(), set())
    graphs = (up, down)
    best = None
    meeting = None
    side = 0
    while heaps[0] or heaps[1]:
        if not heaps[side]:
            side ^= 1
        heap = heaps[side]
        d, x = heap[0]
        if best is not None and d >= best:
            heap.clear()
            side ^= 1
            continue
        heapq.heappop(heap)
        if x in settled[side]:
            side ^= 1
            continue
        settled[side].add(x)
        other = dist[side ^ 1].get(x)
        if other is not None and (best is None or d + other < best):
            best = d + other
            meeting = x
        mine, par = dist[side], parent[side]
        for y, c in graphs[side][x]:
            nd = d + c
            old = mine.get(y)
            if old is None or nd < old:
                mine[y] = nd
                par[y] = x
                heapq.heappush(heap, (nd, y))
                od = dist[side ^ 1].get(y)
                if od is not None and (best is None or nd + od < best):
                    best = nd + od
                    meeting = y
        side ^= 1
    return QueryResult(best, meeting, parent[0], parent[1])


def query(ch: CHGraph, s: int, t: int) -> int | None:
    """Exact shortest-path distance, or None when ``t`` is unreachable."""
    return query_full(ch, s, t).distance


def _expand(ch: CHGraph, a: int, b: int, out: list[int]) -> None:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        _, mid = ch.arc(x, y)
        if mid < 0:
            out.append(y)
        else:
            stack.append((mid, y))
            stack.append((x, mid))


def unpack(ch: CHGraph, res: QueryResult) -> list[int]:
    """Expand the meeting path into original-graph nodes, source first."""
    if res.distance is None:
        raise ValueError("cannot unpack an unreachable query")
    m = res.meeting
    head = []
    x = m
    while x is not None:
        head.append(x)
        x = res.fwd_parent[x]
    head.reverse()
    tail = []
    x = res.bwd_parent[m]
    prev = m
    while x is not None:
        tail.append((prev, x))
        prev, x = x, res.bwd_parent[x]
    path = [head[0]]
    for a, b in zip(head, head[1:]):
        _expand(ch, a, b, path)
    for a, b in tail:
        _expand(ch, a, b, path)
    return path


def query_path(ch: CHGraph, s: int, t: int) -> tuple[int | None, list[int]]:
    res = query_full(ch, s, t)
    if res.distance is None:
        return None, []
    return res.distance, unpack(ch, res)


def path_weight(g: InputGraph, path: list[int]) -> int:
    """Sum of the cheapest input arc weights along ``path``."""
    src, dst, w = g.arcs()
    lookup = dict(zip(zip(src.tolist(), dst.tolist()), w.tolist()))
    return sum(lookup[(a, b)] for a, b in zip(path, path[1:]))


# -------------------------------------------------------------------- oracle


def dijkstra_all(adj: list[list[tuple[int, int]]], s: int) -> dict[int, int]:
    dist = {s: 0}
    heap = [(0, s)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, c in adj[x]:
            nd = d + c
            if nd < dist.get(y, nd + 1):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def dijkstra_oracle(g: InputGraph, s: int, t: int, adj=None) -> int | None:
    """Textbook Dijkstra; pass a prebuilt ``g.adjacency()`` to amortize."""
    if adj is None:
        adj = g.adjacency()
    dist = {s: 0}
    heap = [(0, s)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x == t:
            return d
        if x in done:
            continue
        done.add(x)
        for y, c in adj[x]:
            nd = d + c
            if nd < dist.get(y, nd + 1):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return None


# ------------------------------------------------------------------- CH file

CH_MAGIC = b"TCHH"
CH_VERSION = 1
_CH_HEADER = struct.Struct("<4sB3xIQ")  # magic, version, pad, n, arc count
ARC_DTYPE = np.dtype([("u", "<u4"), ("v", "<u4"), ("weight", "<u4")])


def save_ch(path: str | os.PathLike, g: InputGraph, r: CHResult) -> None:
    """Layout (little endian): ``magic[4] version:u8 pad[3] n:u32 arcs:u64``,
    the normalized input arcs as ``(u:u32, v:u32, weight:u32)`` records, then
    the result block (``TCHR`` header, rank:u32[n], level:u32[n], shortcut
    records ``(u:u32, w:u32, weight:u64, middle:i32, flags:u8)``)."""
    src, dst, w = g.arcs()
    arcs = np.zeros(len(src), ARC_DTYPE)
    arcs["u"], arcs["v"], arcs["weight"] = src, dst, w
    with open(path, "wb") as fh:
        fh.write(_CH_HEADER.pack(CH_MAGIC, CH_VERSION, g.node_count, len(arcs)))
        fh.write(arcs.tobytes())
        fh.write(r.to_bytes())


def load_ch(path: str | os.PathLike) -> tuple[InputGraph, CHResult]:
    """Returns the stored (normalized, one-way) graph and the result."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _CH_HEADER.size:
        raise GraphFormatError("truncated CH file")
    magic, version, n, m = _CH_HEADER.unpack_from(data)
    if magic != CH_MAGIC:
        raise GraphFormatError("not a CH file (bad magic)")
    if version != CH_VERSION:
        raise GraphFormatError(f"unsupported CH file version {version}")
    off = _CH_HEADER.size
    try:
        arcs = np.frombuffer(data, ARC_DTYPE, m, off)
        off += ARC_DTYPE.itemsize * m
        result, end = CHResult.from_bytes(data, off)
    except (ValueError, struct.error) as exc:
        raise GraphFormatError(f"corrupt CH file: {exc}") from None
    if end != len(data) or result.node_count != n:
        raise GraphFormatError("CH file size does not match header")
    g = InputGraph(n, arcs["u"], arcs["v"], arcs["weight"], np.ones(m, bool), np.zeros(m, bool))
    return g, result
