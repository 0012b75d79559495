"""Binary min-heap with decrease-key.

The heap keeps ``(node, dist)`` pairs in two parallel lists and asks an
*index store* where each node currently sits.  Two stores are available:

* :class:`DenseIndex` -- arrays of size n with generation stamps (``array``)
* :class:`~tabch.storage.HashStorage` -- 384 KiB tabulation-hash table
  (``xorhash``)

Once a node has been popped it stays *settled* until the next :meth:`reset`;
the store then holds :data:`SETTLED` for it and further pushes are ignored.
This is exactly what Dijkstra-style searches need.

Sift rules are fixed (strict comparisons, left child on ties) so the pop order
depends only on the operation history, never on the store.  The compiled
engine mirrors them exactly.
"""

from __future__ import annotations

from array import array

from .storage import STAMP_MAX, HashStorage
from .tabulation import TabulationTables

SETTLED = 0xFFFFFFFF

ARRAY = "array"
XORHASH = "xorhash"
STORE_KINDS = (ARRAY, XORHASH)


class DenseIndex:
    """Per-node slot array with per-node stamps; ``clear`` is O(1)."""

    def __init__(self, n: int):
        self.n = n
        self.values = array("I", bytes(4 * n))
        self.stamps = array("I", bytes(4 * n))
        self.current_stamp = 1
        self.live_count = 0

    @property
    def nbytes(self) -> int:
        return 8 * self.n

    def put(self, key: int, value: int) -> None:
        if self.stamps[key] != self.current_stamp:
            self.stamps[key] = self.current_stamp
            self.live_count += 1
        self.values[key] = value

    def get(self, key: int) -> int | None:
        if self.stamps[key] != self.current_stamp:
            return None
        return self.values[key]

    def clear(self) -> None:
        if self.current_stamp == STAMP_MAX:
            for i in range(self.n):
                self.stamps[i] = 0
            self.current_stamp = 1
        else:
            self.current_stamp += 1
        self.live_count = 0


def make_index_store(kind: str, n: int, tables: TabulationTables | None = None):
    if kind == ARRAY:
        return DenseIndex(n)
    if kind == XORHASH:
        if tables is None:
            raise ValueError("xorhash store needs tabulation tables")
        return HashStorage(tables)
    raise ValueError(f"unknown queue store {kind!r}; expected one of {STORE_KINDS}")


class MinHeap:
    def __init__(self, store):
        self.store = store
        self.nodes: list[int] = []
        self.dists: list[int] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def __bool__(self) -> bool:
        return bool(self.nodes)

    def reset(self) -> None:
        self.nodes.clear()
        self.dists.clear()
        self.store.clear()

    def is_settled(self, node: int) -> bool:
        return self.store.get(node) == SETTLED

    def peek(self) -> tuple[int, int] | None:
        if not self.nodes:
            return None
        return self.nodes[0], self.dists[0]

    def push_or_decrease(self, node: int, dist: int) -> None:
        slot = self.store.get(node)
        if slot is None:
            slot = len(self.nodes)
            self.nodes.append(node)
            self.dists.append(dist)
            self.store.put(node, slot)
        elif slot == SETTLED or self.dists[slot] <= dist:
            return
        self._sift_up(slot, node, dist)

    def pop_min(self) -> tuple[int, int] | None:
        nodes, dists = self.nodes, self.dists
        if not nodes:
            return None
        top_node, top_dist = nodes[0], dists[0]
        last_node, last_dist = nodes.pop(), dists.pop()
        self.store.put(top_node, SETTLED)
        if nodes:
            self._sift_down(0, last_node, last_dist)
        return top_node, top_dist

    def _sift_up(self, pos: int, node: int, dist: int) -> None:
        nodes, dists, put = self.nodes, self.dists, self.store.put
        while pos > 0:
            parent = (pos - 1) >> 1
            if dists[parent] <= dist:
                break
            nodes[pos] = nodes[parent]
            dists[pos] = dists[parent]
            put(nodes[pos], pos)
            pos = parent
        nodes[pos] = node
        dists[pos] = dist
        put(node, pos)

    def _sift_down(self, pos: int, node: int, dist: int) -> None:
        nodes, dists, put = self.nodes, self.dists, self.store.put
        size = len(nodes)
        while True:
            child = 2 * pos + 1
            if child >= size:
                break
            if child + 1 < size and dists[child + 1] < dists[child]:
                child += 1
            if dists[child] >= dist:
                break
            nodes[pos] = nodes[child]
            dists[pos] = dists[child]
            put(nodes[pos], pos)
            pos = child
        nodes[pos] = node
        dists[pos] = dist
        put(node, pos)

    def check_heap_property(self) -> bool:
        dists = self.dists
        for i in range(1, len(dists)):
            if dists[(i - 1) >> 1] > dists[i]:
                return False
        for pos, node in enumerate(self.nodes):
            if self.store.get(node) != pos:
                return False
        return True
