"""Fixed-capacity node -> slot map used as a priority queue's index store.

Cells are addressed by the tabulation hash masked to 15 bits and collisions
are resolved by linear probing.  Every cell carries the stamp of the epoch in
which it was last written; a cell is live only while its stamp equals the
table's current stamp, so ``clear`` is a single increment.

There is no delete: the queue only inserts, updates and bulk-clears, which
keeps linear probing free of tombstones.
"""

from __future__ import annotations

from array import array

from .tabulation import TabulationTables

CAPACITY = 1 << 15
SLOT_MASK = CAPACITY - 1
CELL_WORDS = 3  # key, value, stamp
CELL_BYTES = 4 * CELL_WORDS
STAMP_MAX = 0xFFFFFFFF


class StorageFullError(RuntimeError):
    pass


class HashStorage:
    """2**15 cells of (key, value, stamp), each a 32-bit word, stored
    interleaved in one buffer: 12 bytes per cell, 384 KiB per table."""

    def __init__(self, tables: TabulationTables):
        self.tables = tables
        self._t0 = tables.t0.tolist()
        self._t1 = tables.t1.tolist()
        self.cells = array("I", bytes(CAPACITY * CELL_BYTES))
        # stamp 0 marks never-written cells, so the first live epoch is 1
        self.current_stamp = 1
        self.live_count = 0

    @property
    def capacity(self) -> int:
        return CAPACITY

    @property
    def nbytes(self) -> int:
        return len(self.cells) * self.cells.itemsize

    def slot_of(self, key: int) -> int:
        return (self._t1[(key >> 16) & 0xFFFF] ^ self._t0[key & 0xFFFF]) & SLOT_MASK

    def put(self, key: int, value: int) -> None:
        cells = self.cells
        stamp = self.current_stamp
        slot = (self._t1[(key >> 16) & 0xFFFF] ^ self._t0[key & 0xFFFF]) & SLOT_MASK
        for _ in range(CAPACITY):
            base = slot * 3
            if cells[base + 2] != stamp:
                cells[base] = key
                cells[base + 1] = value
                cells[base + 2] = stamp
                self.live_count += 1
                return
            if cells[base] == key:
                cells[base + 1] = value
                return
            slot = (slot + 1) & SLOT_MASK
        raise StorageFullError(f"hash storage full ({CAPACITY} live cells)")

    def get(self, key: int) -> int | None:
        cells = self.cells
        stamp = self.current_stamp
        slot = (self._t1[(key >> 16) & 0xFFFF] ^ self._t0[key & 0xFFFF]) & SLOT_MASK
        for _ in range(CAPACITY):
            base = slot * 3
            if cells[base + 2] != stamp:
                return None
            if cells[base] == key:
                return cells[base + 1]
            slot = (slot + 1) & SLOT_MASK
        return None

    def __contains__(self, key: int) -> bool:
        return self.get(key) is not None

    def __len__(self) -> int:
        return self.live_count

    def clear(self) -> None:
        if self.current_stamp == STAMP_MAX:
            self._sweep()
        else:
            self.current_stamp += 1
        self.live_count = 0

    def _sweep(self) -> None:
        # Slow path, once every 2**32 - 1 clears.
        cells = self.cells
        for i in range(2, len(cells), 3):
            cells[i] = 0
        self.current_stamp = 1
