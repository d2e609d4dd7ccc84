"""Closed-set store implementations and the factory the engine uses.

Every store answers ``find_or_put(vector) -> (ref, seen)`` with stable
references; all but the basic tree also answer ``get(ref)``. The plain
hash store is the uncompressed baseline (compression ratio 1 by
construction).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .collapse import CollapseDb, CollapseLayout
from .errors import ConfigError, InvalidReferenceError
from .model import Model, Vector
from .node_table import TableConfig
from .tree import BasicTreeDb, ConcurrentTreeDb

STORE_KINDS = ("hashtable", "tree", "tree-basic", "tree-incremental", "collapse")


@dataclass
class PlainStoreStats:
    k: int
    states: int
    ref_bits: int


class PlainHashStore:
    """Uncompressed baseline: whole vectors in one mutex-guarded map."""

    mode = "hashtable"

    def __init__(self, k: int, ref_bits: int = 32):
        self.k = k
        self.ref_bits = ref_bits
        self._index: dict[Vector, int] = {}
        self._rows: list[Vector] = []
        self._lock = threading.Lock()

    def find_or_put(self, vector) -> tuple[int, bool]:
        if len(vector) != self.k:
            raise ValueError(f"expected a vector of length {self.k}, got {len(vector)}")
        v = tuple(vector)
        with self._lock:
            ref = self._index.get(v)
            if ref is not None:
                return ref, True
            ref = len(self._rows)
            self._index[v] = ref
            self._rows.append(v)
            return ref, False

    def get(self, ref: int) -> Vector:
        if not 0 <= ref < len(self._rows):
            raise InvalidReferenceError(f"reference {ref} out of range")
        return self._rows[ref]

    def __contains__(self, vector) -> bool:
        return tuple(vector) in self._index

    def __len__(self) -> int:
        return len(self._rows)

    def stats(self) -> PlainStoreStats:
        return PlainStoreStats(k=self.k, states=len(self._rows), ref_bits=self.ref_bits)


def make_store(kind: str, model: Model, table_bits: int = 20, ref_bits: int = 32,
               load_factor: float = 0.95):
    """Build the requested closed-set store for a model."""
    if kind not in STORE_KINDS:
        raise ConfigError(f"unknown store kind {kind!r}; expected one of {STORE_KINDS}")
    if kind == "hashtable":
        return PlainHashStore(model.k, ref_bits=ref_bits)
    if kind == "collapse":
        return CollapseDb(CollapseLayout.for_model(model), ref_bits=ref_bits)
    if kind == "tree-basic":
        return BasicTreeDb(model.k, ref_bits=ref_bits)
    config = TableConfig(capacity=1 << table_bits, ref_bits=ref_bits, load_factor=load_factor)
    return ConcurrentTreeDb(model.k, config=config)


def insert_all(store, vectors) -> int:
    """Insert a vector batch; return how many were new."""
    fresh = 0
    for v in vectors:
        _ref, seen = store.find_or_put(v)
        if not seen:
            fresh += 1
    return fresh
