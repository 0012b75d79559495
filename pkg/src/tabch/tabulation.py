"""32-bit -> 16-bit tabulation hashing.

A key is split into its high and low 16-bit halves; each half indexes its
own table of random 16-bit values and the two lookups are XOR-ed.  Both
tables are random permutations of ``0 .. 2**16 - 1``, so together they take
256 KiB and stay cache resident.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TABLE_SIZE = 1 << 16
_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014; constants as in Vigna's
    reference ``splitmix64.c``).

    Used for every shuffle in the package so that tables and bias arrays are
    bit-for-bit reproducible across platforms and numpy versions.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        # Lemire multiply-shift; bias is at most bound / 2**64.
        return (self.next() * bound) >> 64


def fisher_yates(values: list, rng: SplitMix64) -> list:
    """Shuffle ``values`` in place (Durstenfeld variant) and return it."""
    below = rng.below
    for i in range(len(values) - 1, 0, -1):
        j = below(i + 1)
        values[i], values[j] = values[j], values[i]
    return values


def shuffled_range(n: int, seed: int) -> np.ndarray:
    return np.array(fisher_yates(list(range(n)), SplitMix64(seed)), dtype=np.uint32)


@dataclass(frozen=True, eq=False)
class TabulationTables:
    """Two 2**16-entry lookup tables; ``t0`` serves the low half of a key,
    ``t1`` the high half."""

    t0: np.ndarray
    t1: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        for name in ("t0", "t1"):
            table = getattr(self, name)
            if table.shape != (TABLE_SIZE,):
                raise ValueError(f"{name} must have {TABLE_SIZE} entries")
            if table.dtype != np.uint16:
                object.__setattr__(self, name, table.astype(np.uint16))
        # plain-list mirrors: scalar indexing on lists is much cheaper than on ndarrays
        object.__setattr__(self, "_l0", self.t0.tolist())
        object.__setattr__(self, "_l1", self.t1.tolist())

    @classmethod
    def identity(cls) -> "TabulationTables":
        """Test-only tables with ``t0[i] == t1[i] == i``."""
        ident = np.arange(TABLE_SIZE, dtype=np.uint16)
        return cls(ident, ident.copy(), None)

    @property
    def nbytes(self) -> int:
        return self.t0.nbytes + self.t1.nbytes

    def __call__(self, x: int) -> int:
        return self._l1[(x >> 16) & 0xFFFF] ^ self._l0[x & 0xFFFF]

    def hash_many(self, keys: np.ndarray) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.uint32)
        return self.t1[keys >> 16] ^ self.t0[keys & 0xFFFF]


def init_tables(seed: int) -> TabulationTables:
    """Build both tables from one SplitMix64 stream: ``t0`` is shuffled first,
    then ``t1`` continues the same stream."""
    rng = SplitMix64(seed)
    t0 = fisher_yates(list(range(TABLE_SIZE)), rng)
    t1 = fisher_yates(list(range(TABLE_SIZE)), rng)
    return TabulationTables(
        np.array(t0, dtype=np.uint16), np.array(t1, dtype=np.uint16), seed
    )


def tab_hash(tables: TabulationTables, x: int) -> int:
    return tables(x)
