"""Tie-breaking orders for independent-set selection.

Two consistent backends are provided:

* ``bias``: a shuffled permutation ``A`` of ``0..n-1``; ``a`` precedes ``b``
  iff ``A[a] < A[b]``.  O(n) memory, one random access per node.
* ``xor``: tabulation hash; ``a`` precedes ``b`` iff ``(h(a), a) < (h(b), b)``.
  Constant memory (the 256 KiB tables).

``inconsistent`` answers ``False`` for every comparison.  It exists only so
tests can drive the engine into the no-progress state.
"""

from __future__ import annotations

import numpy as np

from .tabulation import TabulationTables, init_tables, shuffled_range

BIAS = "bias"
XOR = "xor"
INCONSISTENT = "inconsistent"
KINDS = (BIAS, XOR)


class TieBreaker:
    kind: str = ""
    consistent = True

    def key(self, v: int) -> int:
        """Sort key realizing the order: ``a`` precedes ``b`` iff key(a) < key(b)."""
        raise NotImplementedError

    def precedes(self, a: int, b: int) -> bool:
        assert a != b, "precedes() needs two distinct nodes"
        return self.key(a) < self.key(b)

    def keys(self, nodes: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class BiasArray(TieBreaker):
    kind = BIAS

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.uint32)
        self._list = self.values.tolist()

    def key(self, v: int) -> int:
        return self._list[v]

    def precedes(self, a: int, b: int) -> bool:
        assert a != b, "precedes() needs two distinct nodes"
        bias = self._list
        return bias[a] < bias[b]

    def keys(self, nodes):
        return self.values[np.asarray(nodes, dtype=np.int64)].astype(np.uint64)

    @property
    def nbytes(self) -> int:
        return self.values.nbytes


class TabHash(TieBreaker):
    kind = XOR

    def __init__(self, tables: TabulationTables):
        self.tables = tables
        self._l0 = tables.t0.tolist()
        self._l1 = tables.t1.tolist()

    def key(self, v: int) -> int:
        return ((self._l1[v >> 16] ^ self._l0[v & 0xFFFF]) << 32) | v

    def precedes(self, a: int, b: int) -> bool:
        assert a != b, "precedes() needs two distinct nodes"
        t0, t1 = self._l0, self._l1
        ha = t1[a >> 16] ^ t0[a & 0xFFFF]
        hb = t1[b >> 16] ^ t0[b & 0xFFFF]
        if ha != hb:
            return ha < hb
        return a < b

    def keys(self, nodes):
        nodes = np.asarray(nodes, dtype=np.uint32)
        return (self.tables.hash_many(nodes).astype(np.uint64) << np.uint64(32)) | nodes

    @property
    def nbytes(self) -> int:
        return self.tables.nbytes


class InconsistentTest(TieBreaker):
    """Test-only comparator: nothing ever precedes anything."""

    kind = INCONSISTENT
    consistent = False

    def key(self, v: int) -> int:
        return 0

    def precedes(self, a: int, b: int) -> bool:
        return False


def make_bias_array(n: int, seed: int) -> BiasArray:
    if n < 1:
        raise ValueError("bias array needs n >= 1")
    return BiasArray(shuffled_range(n, seed))


def make_tie_breaker(kind: str, n: int, seed: int, tables: TabulationTables | None = None) -> TieBreaker:
    if kind == BIAS:
        return make_bias_array(max(n, 1), seed)
    if kind == XOR:
        return TabHash(tables if tables is not None else init_tables(seed))
    if kind == INCONSISTENT:
        return InconsistentTest()
    raise ValueError(f"unknown tie-breaker {kind!r}; expected one of {KINDS}")


def precedes(tb: TieBreaker, a: int, b: int) -> bool:
    return tb.precedes(a, b)
