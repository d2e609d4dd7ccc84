"""Fixed-capacity concurrent hash table for tree node entries.

One entry is a pair of b-bit words (a left and a right reference) plus a
one-bit root tag. All entries of a tree database live in this single
table, which gives them stable indices (the table never resizes or
relocates) and maximal sharing (equal pairs stored once, regardless of
the tree position they came from).

Layout: entries are kept in one contiguous ``array('Q')`` buffer as
interleaved (word, tag) pairs, so the tag sits in the same 16-byte
record as its entry rather than in a separate bit vector. The packed
word holds ``left << b | right``; the all-ones word is the empty-slot
marker, which reserves exactly one pair value (all-ones, all-ones) that
can never be stored.

Probing is open addressing in 8-slot lines: hash to a line, walk the
line, rehash to another line, up to a fixed number of lines. A table
declares itself full at a configurable load factor (default 0.95) or at
the probe limit, whichever comes first; it then raises
:class:`~treedb.errors.CapacityError` rather than degrade.

Concurrency model: safe for any mix of ``find_or_put``, ``get`` and
``tag_root`` from multiple threads. Single-element reads and writes of
the backing array are atomic under the CPython GIL, so readers never
see torn words; compound update steps (claiming an empty slot, flipping
a tag) run under striped per-line mutexes. Readers take no locks.
"""

from __future__ import annotations

import threading
from array import array
from dataclasses import dataclass

from .errors import CapacityError, ConfigError, InvalidReferenceError

_M64 = (1 << 64) - 1
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STEP = 0x9E3779B97F4A7C15

_EMPTY = _M64
_LINE = 8  # slots probed per hash before rehashing
_MAX_LINES = 128
_STRIPES = 1024

NON_ROOT = 0
IS_ALSO_ROOT = 1


@dataclass(frozen=True)
class TableConfig:
    """Sizing of a node table. Capacity is fixed for the table's lifetime."""

    capacity: int = 1 << 20
    ref_bits: int = 32
    load_factor: float = 0.95

    def __post_init__(self):
        cap, b = self.capacity, self.ref_bits
        if cap < 2 or cap & (cap - 1):
            raise ConfigError(f"capacity must be a power of two >= 2, got {cap}")
        if not 1 <= b <= 32:
            raise ConfigError(f"ref_bits must be in 1..32, got {b}")
        if cap > 1 << b:
            raise ConfigError(
                f"capacity 2^{cap.bit_length() - 1} exceeds the 2^{b} indices "
                f"representable in {b}-bit references"
            )
        if not 0.0 < self.load_factor <= 1.0:
            raise ConfigError(f"load_factor must be in (0, 1], got {self.load_factor}")


@dataclass
class TableStats:
    """Occupancy snapshot. Exact when no writers are active."""

    entries: int
    roots: int
    capacity: int
    ref_bits: int
    entry_payload_bits: int  # 2*ref_bits + 1 tag bit
    entry_stride_bytes: int  # backing record size, includes slack
    backing_bytes: int  # allocated buffer, independent of occupancy
    access_count: int


class NodeTable:
    """Concurrent insert-or-find table of (left, right) reference pairs."""

    __slots__ = (
        "config",
        "_arr",
        "_mask",
        "_b",
        "_word_max",
        "_locks",
        "_count_lock",
        "_used",
        "_roots",
        "_limit",
        "access_count",
    )

    def __init__(self, config: TableConfig | None = None, **kwargs):
        if config is None:
            config = TableConfig(**kwargs)
        elif kwargs:
            raise ConfigError("pass either a TableConfig or keyword fields, not both")
        self.config = config
        # Interleaved (word, tag) records; words start all-ones (empty), tags 0.
        self._arr = array("Q", (b"\xff" * 8 + b"\x00" * 8) * config.capacity)
        self._mask = config.capacity - 1
        self._b = config.ref_bits
        self._word_max = (1 << (2 * config.ref_bits)) - 1
        self._locks = [threading.Lock() for _ in range(min(_STRIPES, config.capacity))]
        self._count_lock = threading.Lock()
        self._used = 0
        self._roots = 0
        self._limit = int(config.capacity * config.load_factor)
        # Lookup instrumentation; exact in single-threaded runs.
        self.access_count = 0

    def __len__(self) -> int:
        return self._used

    @property
    def capacity(self) -> int:
        return self.config.capacity

    def find_or_put(self, left: int, right: int) -> tuple[int, bool]:
        """Insert the pair if absent; return ``(index, seen)``.

        The index-to-pair association is stable for the table's
        lifetime. Linearizable per pair: concurrent calls with the same
        pair all return the same index and exactly one gets seen=False.
        """
        b = self._b
        hi = self._word_max >> b
        if not (0 <= left <= hi and 0 <= right <= hi):
            raise ValueError(f"pair ({left}, {right}) does not fit in {b}-bit words")
        word = (left << b) | right
        if word == _EMPTY:
            raise ValueError("the all-ones pair is reserved as the empty-slot marker")
        self.access_count += 1

        arr = self._arr
        mask = self._mask
        nlocks = len(self._locks)
        h = (word * _MIX1) & _M64
        h ^= h >> 32
        h = (h * _MIX2) & _M64
        for _ in range(_MAX_LINES):
            base = (h >> 24) & mask
            start = base & ~(_LINE - 1)
            off = base & (_LINE - 1)
            for j in range(_LINE):
                i = start + ((off + j) & (_LINE - 1))
                cur = arr[2 * i]
                if cur == word:
                    return i, True
                if cur == _EMPTY:
                    lock = self._locks[(i >> 3) % nlocks]
                    with lock:
                        cur = arr[2 * i]
                        if cur == _EMPTY:
                            with self._count_lock:
                                if self._used >= self._limit:
                                    raise CapacityError(
                                        f"node table full: {self._used} entries at load "
                                        f"factor {self.config.load_factor} of capacity "
                                        f"{self.config.capacity}; increase --table-bits",
                                        entries=self._used,
                                        capacity=self.config.capacity,
                                    )
                                self._used += 1
                            arr[2 * i] = word
                            return i, False
                        if cur == word:
                            return i, True
                    # Slot was claimed for a different pair; keep probing.
            h = (h * _MIX1 + _STEP) & _M64
        raise CapacityError(
            f"node table probe limit hit after {_MAX_LINES} lines "
            f"({self._used}/{self.config.capacity} entries); increase --table-bits",
            entries=self._used,
            capacity=self.config.capacity,
        )

    def get(self, ref: int) -> tuple[int, int]:
        """Return the pair stored at ``ref``.

        Only indices returned by a completed :meth:`find_or_put` are
        valid; unoccupied indices raise rather than leak garbage.
        """
        self.access_count += 1
        if not 0 <= ref < self.config.capacity:
            raise InvalidReferenceError(f"reference {ref} out of range")
        word = self._arr[2 * ref]
        if word == _EMPTY:
            raise InvalidReferenceError(f"reference {ref} is unoccupied")
        b = self._b
        return word >> b, word & ((1 << b) - 1)

    def tag_root(self, ref: int) -> bool:
        """Atomically flip the entry's tag from non-root to root.

        Returns True for exactly one caller per entry; every later or
        concurrent call returns False. The tag never goes back.
        """
        if not 0 <= ref < self.config.capacity or self._arr[2 * ref] == _EMPTY:
            raise InvalidReferenceError(f"reference {ref} is not an occupied entry")
        pos = 2 * ref + 1
        arr = self._arr
        if arr[pos] == IS_ALSO_ROOT:
            return False
        with self._locks[(ref >> 3) % len(self._locks)]:
            if arr[pos] == IS_ALSO_ROOT:
                return False
            arr[pos] = IS_ALSO_ROOT
        with self._count_lock:
            self._roots += 1
        return True

    def is_root(self, ref: int) -> bool:
        return self._arr[2 * ref + 1] == IS_ALSO_ROOT

    def occupied(self, ref: int) -> bool:
        return 0 <= ref < self.config.capacity and self._arr[2 * ref] != _EMPTY

    def entries(self):
        """Yield (index, left, right, tag) for occupied slots, ascending index."""
        arr = self._arr
        b = self._b
        rmask = (1 << b) - 1
        for i in range(self.config.capacity):
            word = arr[2 * i]
            if word != _EMPTY:
                yield i, word >> b, word & rmask, arr[2 * i + 1]

    def dump(self, out) -> None:
        """Write the debug dump: one ``index\\tleft\\tright\\ttag`` line per entry."""
        for i, left, right, tag in self.entries():
            out.write(f"{i}\t{left}\t{right}\t{tag}\n")

    def stats(self) -> TableStats:
        return TableStats(
            entries=self._used,
            roots=self._roots,
            capacity=self.config.capacity,
            ref_bits=self._b,
            entry_payload_bits=2 * self._b + 1,
            entry_stride_bytes=16,
            backing_bytes=16 * self.config.capacity,
            access_count=self.access_count,
        )

    def raw_words(self) -> array:
        """The backing buffer, for byte-level differential tests."""
        return self._arr
