"""Graph input, normalization and the mutable contraction overlay."""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

FORWARD = 1
BACKWARD = 2
SHORTCUT = 4

NO_MIDDLE = -1
INF = 1 << 62
MAX_WEIGHT = 0xFFFFFFFF


class GraphFormatError(ValueError):
    """Malformed graph input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class InputGraph:
    node_count: int
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    forward: np.ndarray
    backward: np.ndarray

    def __post_init__(self):
        self.sources = np.asarray(self.sources, dtype=np.uint32)
        self.targets = np.asarray(self.targets, dtype=np.uint32)
        self.weights = np.asarray(self.weights, dtype=np.uint32)
        self.forward = np.asarray(self.forward, dtype=bool)
        self.backward = np.asarray(self.backward, dtype=bool)
        m = len(self.sources)
        for arr in (self.targets, self.weights, self.forward, self.backward):
            if len(arr) != m:
                raise ValueError("edge arrays differ in length")
        if m and (self.sources.max() >= self.node_count or self.targets.max() >= self.node_count):
            raise ValueError("edge endpoint outside [0, node_count)")

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple]) -> "InputGraph":
        """Edges are ``(u, v, w)`` (one-way) or ``(u, v, w, forward, backward)``."""
        rows = [e if len(e) == 5 else (e[0], e[1], e[2], True, False) for e in edges]
        if not rows:
            return cls(node_count, [], [], [], [], [])
        u, v, w, f, b = zip(*rows)
        if min(w) < 0 or max(w) > MAX_WEIGHT:
            raise ValueError("weights must fit in 32 unsigned bits")
        return cls(node_count, u, v, w, f, b)

    @classmethod
    def undirected(cls, node_count: int, edges: Iterable[tuple]) -> "InputGraph":
        return cls.from_edges(node_count, [(u, v, w, True, True) for u, v, w in edges])

    @property
    def edge_count(self) -> int:
        return len(self.sources)

    def arcs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Directed arcs after normalization: self-loops dropped, parallel arcs
        collapsed to their minimum weight, sorted by (source, target)."""
        f, b = self.forward, self.backward
        src = np.concatenate([self.sources[f], self.targets[b]]).astype(np.int64)
        dst = np.concatenate([self.targets[f], self.sources[b]]).astype(np.int64)
        w = np.concatenate([self.weights[f], self.weights[b]]).astype(np.int64)
        keep = src != dst
        src, dst, w = src[keep], dst[keep], w[keep]
        order = np.lexsort((w, dst, src))
        src, dst, w = src[order], dst[order], w[order]
        if len(src):
            first = np.ones(len(src), dtype=bool)
            first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
            src, dst, w = src[first], dst[first], w[first]
        return src, dst, w

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Forward adjacency ``adj[u] = [(v, w), ...]`` of the normalized arcs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        src, dst, w = self.arcs()
        for u, v, c in zip(src.tolist(), dst.tolist(), w.tolist()):
            adj[u].append((v, c))
        return adj


# --------------------------------------------------------------------- DIMACS


def load_dimacs(stream: TextIO | str) -> InputGraph:
    """Parse a 9th DIMACS challenge ``.gr`` file (1-based ids) into one-way arcs."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    n = m = None
    us: list[int] = []
    vs: list[int] = []
    ws: list[int] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise GraphFormatError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "sp":
                raise GraphFormatError("expected 'p sp <nodes> <arcs>'", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError("non-integer in problem line", lineno) from None
            if n < 0 or m < 0:
                raise GraphFormatError("negative size in problem line", lineno)
        elif tag == "a":
            if n is None:
                raise GraphFormatError("arc before problem line", lineno)
            if len(parts) != 4:
                raise GraphFormatError("expected 'a <u> <v> <w>'", lineno)
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError("non-integer in arc line", lineno) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphFormatError(f"id out of range [1, {n}]", lineno)
            if w < 0:
                raise GraphFormatError("negative weight", lineno)
            if w > MAX_WEIGHT:
                raise GraphFormatError("weight exceeds 32 bits", lineno)
            us.append(u - 1)
            vs.append(v - 1)
            ws.append(w)
        else:
            raise GraphFormatError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise GraphFormatError("missing problem line")
    if len(us) != m:
        raise GraphFormatError(f"header announces {m} arcs, found {len(us)}")
    count = len(us)
    return InputGraph(n, us, vs, ws, np.ones(count, bool), np.zeros(count, bool))


def write_dimacs(g: InputGraph, stream: TextIO, comment: str | None = None) -> None:
    f, b = g.forward, g.backward
    src = np.concatenate([g.sources[f], g.targets[b]]) + 1
    dst = np.concatenate([g.targets[f], g.sources[b]]) + 1
    w = np.concatenate([g.weights[f], g.weights[b]])
    if comment:
        stream.write(f"c {comment}\n")
    stream.write(f"p sp {g.node_count} {len(src)}\n")
    for u, v, c in zip(src.tolist(), dst.tolist(), w.tolist()):
        stream.write(f"a {u} {v} {c}\n")


# --------------------------------------------------------------- binary cache

GRAPH_MAGIC = b"TCHG"
GRAPH_VERSION = 1
_GRAPH_HEADER = struct.Struct("<4sB3xIQ")  # magic, version, pad, n, m


def save_graph_binary(g: InputGraph, path: str | os.PathLike) -> None:
    """Layout (little endian): header ``magic[4] version:u8 pad[3] n:u32 m:u64``
    then ``src:u32[m] dst:u32[m] weight:u32[m] flags:u8[m]`` (bit0 forward,
    bit1 backward)."""
    flags = g.forward.astype(np.uint8) | (g.backward.astype(np.uint8) << 1)
    with open(path, "wb") as fh:
        fh.write(_GRAPH_HEADER.pack(GRAPH_MAGIC, GRAPH_VERSION, g.node_count, g.edge_count))
        for arr in (g.sources, g.targets, g.weights):
            fh.write(arr.astype("<u4").tobytes())
        fh.write(flags.tobytes())


def load_graph_binary(path: str | os.PathLike) -> InputGraph:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _GRAPH_HEADER.size:
        raise GraphFormatError("truncated binary graph header")
    magic, version, n, m = _GRAPH_HEADER.unpack_from(data)
    if magic != GRAPH_MAGIC:
        raise GraphFormatError("not a binary graph file (bad magic)")
    if version != GRAPH_VERSION:
        raise GraphFormatError(f"unsupported binary graph version {version}")
    if len(data) != _GRAPH_HEADER.size + 13 * m:
        raise GraphFormatError("binary graph size does not match header")
    off = _GRAPH_HEADER.size
    cols = []
    for _ in range(3):
        cols.append(np.frombuffer(data, "<u4", m, off).astype(np.uint32))
        off += 4 * m
    flags = np.frombuffer(data, np.uint8, m, off)
    try:
        return InputGraph(n, cols[0], cols[1], cols[2], flags & 1 != 0, flags & 2 != 0)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def load_graph(path: str | os.PathLike) -> InputGraph:
    """Load either format, sniffing the binary magic."""
    with open(path, "rb") as fh:
        head = fh.read(len(GRAPH_MAGIC))
    if head == GRAPH_MAGIC:
        return load_graph_binary(path)
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return load_dimacs(fh)


def save_graph(g: InputGraph, path: str | os.PathLike) -> None:
    if str(path).endswith(".gr"):
        with open(path, "w") as fh:
            write_dimacs(g, fh)
    else:
        save_graph_binary(g, path)


# ------------------------------------------------------------ overlay entries


def overlay_entries(g: InputGraph):
    """Initial per-node edge entries as CSR arrays.

    Returns ``(offsets, targets, weights, flags)``.  An arc pair u->v, v->u of
    equal weight becomes one entry with both flags at each endpoint; otherwise
    every arc yields a FORWARD entry at its tail and a BACKWARD entry at its
    head.  Within a node entries are ordered by (target, flags).  Both
    contraction engines start from exactly this layout.
    """
    n = g.node_count
    src, dst, w = g.arcs()
    key = src * n + dst
    rkey = dst * n + src
    pos = np.searchsorted(key, rkey)
    pos_c = np.minimum(pos, max(len(key) - 1, 0))
    has_rev = (pos < len(key)) & (key[pos_c] == rkey) if len(key) else np.zeros(0, bool)
    merged = has_rev & (w[pos_c] == w)
    both = merged & (src < dst)
    single = ~merged

    node = np.concatenate([src[both], dst[both], src[single], dst[single]])
    tgt = np.concatenate([dst[both], src[both], dst[single], src[single]])
    wt = np.concatenate([w[both], w[both], w[single], w[single]])
    fl = np.concatenate([
        np.full(both.sum(), FORWARD | BACKWARD),
        np.full(both.sum(), FORWARD | BACKWARD),
        np.full(single.sum(), FORWARD),
        np.full(single.sum(), BACKWARD),
    ]).astype(np.int64)
    order = np.lexsort((fl, tgt, node))
    node, tgt, wt, fl = node[order], tgt[order], wt[order], fl[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, node + 1, 1)
    np.cumsum(offsets, out=offsets)
    return offsets, tgt.astype(np.int64), wt.astype(np.int64), fl.astype(np.int64)


class ContractionGraph:
    """Per-node growable edge lists.

    Each entry is a mutable list ``[target, weight, flags, middle, originals]``:
    FORWARD means the arc node->target exists with ``weight``; BACKWARD means
    target->node does.  ``originals`` counts the input arcs an entry stands
    for.  Contracted nodes are unlinked from their neighbours' lists, so later
    searches never see them.
    """

    __slots__ = ("n", "adj", "contracted")

    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[list[int]]] = [[] for _ in range(n)]
        self.contracted = bytearray(n)

    def edges(self, v: int) -> list[list[int]]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> list[int]:
        return list(dict.fromkeys(e[0] for e in self.adj[v]))

    def arc_weight(self, u: int, w: int) -> int | None:
        for e in self.adj[u]:
            if e[0] == w and e[2] & FORWARD:
                return e[1]
        return None

    def out_arcs(self, v: int) -> list[tuple[int, int]]:
        return [(e[0], e[1]) for e in self.adj[v] if e[2] & FORWARD]

    def shortcut_count(self) -> int:
        return sum(1 for lst in self.adj for e in lst if e[2] & SHORTCUT and e[2] & FORWARD)

    def mark_contracted(self, v: int) -> list[int]:
        """Flag ``v`` and unlink it from its neighbours; returns the neighbours."""
        nbrs = self.neighbors(v)
        self.contracted[v] = 1
        adj = self.adj
        for x in nbrs:
            adj[x] = [e for e in adj[x] if e[0] != v]
        return nbrs


def build_contraction_graph(g: InputGraph) -> ContractionGraph:
    offsets, tgt, wt, fl = overlay_entries(g)
    cg = ContractionGraph(g.node_count)
    off, tgt, wt, fl = offsets.tolist(), tgt.tolist(), wt.tolist(), fl.tolist()
    adj = cg.adj
    for v in range(g.node_count):
        adj[v] = [[tgt[i], wt[i], fl[i], NO_MIDDLE, 1] for i in range(off[v], off[v + 1])]
    return cg


def _place(lst: list, target: int, weight: int, middle: int, originals: int, flag: int) -> bool:
    other = flag ^ (FORWARD | BACKWARD)
    for e in lst:
        if e[0] == target and e[2] & flag:
            if e[1] <= weight:
                return False
            if e[2] & other:
                e[2] &= ~flag
                break
            e[1] = weight
            e[2] = flag | SHORTCUT
            e[3] = middle
            e[4] = originals
            return True
    for e in lst:
        if (e[0] == target and e[2] & SHORTCUT and not e[2] & flag
                and e[1] == weight and e[3] == middle and e[4] == originals):
            e[2] |= flag
            return True
    lst.append([target, weight, flag | SHORTCUT, middle, originals])
    return True


def insert_arc(g: ContractionGraph, u: int, w: int, weight: int, middle: int, originals: int = 2) -> bool:
    """Insert shortcut arc u->w; returns whether the overlay changed."""
    changed = _place(g.adj[u], w, weight, middle, originals, FORWARD)
    mirrored = _place(g.adj[w], u, weight, middle, originals, BACKWARD)
    assert changed == mirrored, "overlay lists out of sync"
    return changed


def insert_shortcut(
    g: ContractionGraph,
    u: int,
    w: int,
    weight: int,
    middle: int,
    flags: int = FORWARD,
    originals: int = 2,
) -> int:
    """Insert a shortcut between ``u`` and ``w``.  FORWARD in ``flags`` means
    the arc u->w, BACKWARD the arc w->u.  An existing arc is lowered (and takes
    the new middle) only if ``weight`` is strictly smaller.  Returns the flags
    that actually changed the overlay."""
    if u == w:
        raise ValueError("shortcut endpoints must differ")
    if g.contracted[u] or g.contracted[w]:
        raise ValueError("shortcut endpoint already contracted")
    applied = 0
    if flags & FORWARD and insert_arc(g, u, w, weight, middle, originals):
        applied |= FORWARD
    if flags & BACKWARD and insert_arc(g, w, u, weight, middle, originals):
        applied |= BACKWARD
    return applied
