"""Tree-compressed storage of fixed-length state vectors.

A vector of k slots is split recursively in halves (ceil left, floor
right) down to single slots, and each internal position stores the pair
of references produced by its children, so equal sub-vectors are stored
once and every distinct vector is identified by a single root reference.
A tree over k slots has exactly k-1 internal positions.

Two database flavours implement the same vector API:

``BasicTreeDb``
    One growable hash table per tree position, plus a side list per
    table that realizes stable indices (costing one extra reference per
    entry). Single-threaded. Kept as the differential-testing baseline
    and because its entry counts follow the closed-form compression
    analysis exactly.

``ConcurrentTreeDb``
    All positions share one fixed-capacity :class:`NodeTable`, which
    gives stable indices for free and lets equal pairs from different
    tree positions share one entry (maximal sharing). Merging the
    tables means the table's own seen/new answer is unreliable at the
    root (a root pair may coincide with some internal pair stored
    earlier), so the verdict comes from atomically flipping the
    entry's root tag instead. Thread-safe. Also provides the
    incremental insert path, which reuses the reference tree recorded
    for a predecessor vector and only touches the table on paths that
    cover changed slots (at most ceil(log2 k) accesses per changed
    slot).

Reference trees are flat ``list[int]`` objects indexed by tree
position in left-to-right postorder; the root reference is the last
element. They are owned by one thread at a time.

The slot value ``2**ref_bits - 1`` is reserved: it marks the imaginary
predecessor used to bootstrap incremental insertion, so real vectors
must keep slot values at or below ``2**ref_bits - 2``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

from .errors import ConfigError, InvalidReferenceError
from .node_table import NodeTable, TableConfig, TableStats


class TreeShape:
    """The balanced split structure over k slots.

    Internal positions are numbered in postorder (children before
    parents, left before right); position k-2 is the root. Child
    sources are encoded as ints: negative values ``~s`` name slot s of
    the vector, non-negative values name another internal position.
    """

    __slots__ = ("k", "left_src", "right_src", "levels", "span_bounds")

    def __init__(self, k: int):
        if k < 2:
            raise ConfigError(f"a tree shape needs k >= 2, got {k}")
        self.k = k
        self.left_src: list[int] = []
        self.right_src: list[int] = []
        self.span_bounds: list[tuple[int, int]] = []  # (first slot, span length)
        self._build(0, k)
        # Depth below the root, for per-level occupancy reporting.
        self.levels = [0] * (k - 1)
        order = [(k - 2, 0)]
        while order:
            node, depth = order.pop()
            self.levels[node] = depth
            for src in (self.left_src[node], self.right_src[node]):
                if src >= 0:
                    order.append((src, depth + 1))

    def _build(self, lo: int, n: int) -> int:
        nl = (n + 1) // 2
        nr = n - nl
        left = ~lo if nl == 1 else self._build(lo, nl)
        right = ~(lo + nl) if nr == 1 else self._build(lo + nl, nr)
        self.left_src.append(left)
        self.right_src.append(right)
        self.span_bounds.append((lo, n))
        return len(self.left_src) - 1

    @property
    def node_count(self) -> int:
        return self.k - 1

    @property
    def root(self) -> int:
        return self.k - 2

    @property
    def height(self) -> int:
        return max(self.levels) + 1


@lru_cache(maxsize=None)
def tree_shape(k: int) -> TreeShape:
    return TreeShape(k)


@dataclass
class TreeDbStats:
    """Raw counters of a tree database, taken at quiescence."""

    mode: str
    k: int
    states: int
    entries: int
    ref_bits: int
    tag_bits: int  # per entry: 1 in the merged table, 0 in basic mode
    overhead_words: int  # stable-index side references (basic mode only)
    entries_per_level: list[int] | None = None
    table: TableStats | None = None


class _GrowTable:
    """Growable pair table with stable indices via a side list."""

    __slots__ = ("index", "pairs", "access_count")

    def __init__(self):
        self.index: dict[tuple[int, int], int] = {}
        self.pairs: list[tuple[int, int]] = []
        self.access_count = 0

    def find_or_put(self, left: int, right: int) -> tuple[int, bool]:
        self.access_count += 1
        key = (left, right)
        ref = self.index.get(key)
        if ref is not None:
            return ref, True
        ref = len(self.pairs)
        self.index[key] = ref
        self.pairs.append(key)
        return ref, False

    def get(self, ref: int) -> tuple[int, int]:
        self.access_count += 1
        if not 0 <= ref < len(self.pairs):
            raise InvalidReferenceError(f"reference {ref} out of range")
        return self.pairs[ref]

    def __len__(self) -> int:
        return len(self.pairs)


class _UnitStore:
    """Degenerate k=1 store: a slot value is its own reference."""

    def __init__(self):
        self._values: set[int] = set()
        self._lock = threading.Lock()

    def find_or_put(self, value: int) -> tuple[int, bool]:
        with self._lock:
            if value in self._values:
                return value, True
            self._values.add(value)
            return value, False

    def __contains__(self, value: int) -> bool:
        return value in self._values

    def __len__(self) -> int:
        return len(self._values)


class BasicTreeDb:
    """Multi-table tree database (one growable table per position).

    Single-threaded only. Entry counts match the worst-case analysis
    exactly because positions never share storage.
    """

    mode = "basic"

    def __init__(self, k: int, ref_bits: int = 32):
        if k < 1:
            raise ConfigError(f"vector length must be >= 1, got {k}")
        self.k = k
        self.ref_bits = ref_bits
        if k == 1:
            self._unit = _UnitStore()
            return
        self._shape = tree_shape(k)
        self._tables = [_GrowTable() for _ in range(k - 1)]

    def find_or_put(self, vector) -> tuple[int, bool]:
        k = self.k
        if len(vector) != k:
            raise ValueError(f"expected a vector of length {k}, got {len(vector)}")
        if k == 1:
            return self._unit.find_or_put(vector[0])
        shape = self._shape
        lsrc = shape.left_src
        rsrc = shape.right_src
        tables = self._tables
        refs = [0] * (k - 1)
        seen = False
        for i in range(k - 1):
            ls = lsrc[i]
            rs = rsrc[i]
            left = vector[~ls] if ls < 0 else refs[ls]
            right = vector[~rs] if rs < 0 else refs[rs]
            refs[i], seen = tables[i].find_or_put(left, right)
        return refs[k - 2], seen

    def get(self, ref: int):
        k = self.k
        if k == 1:
            if ref not in self._unit:
                raise InvalidReferenceError(f"value {ref} was never stored")
            return (ref,)
        shape = self._shape
        out = [0] * k
        stack = [(shape.root, ref)]
        while stack:
            node, r = stack.pop()
            left, right = self._tables[node].get(r)
            ls = shape.left_src[node]
            rs = shape.right_src[node]
            if ls < 0:
                out[~ls] = left
            else:
                stack.append((ls, left))
            if rs < 0:
                out[~rs] = right
            else:
                stack.append((rs, right))
        return tuple(out)

    def __contains__(self, vector) -> bool:
        ref, seen = self._probe(vector)
        return seen

    def _probe(self, vector):
        """Membership without insertion (test helper)."""
        if self.k == 1:
            return vector[0], vector[0] in self._unit
        shape = self._shape
        refs = [0] * (self.k - 1)
        for i in range(self.k - 1):
            ls = shape.left_src[i]
            rs = shape.right_src[i]
            left = vector[~ls] if ls < 0 else refs[ls]
            right = vector[~rs] if rs < 0 else refs[rs]
            hit = self._tables[i].index.get((left, right))
            if hit is None:
                return None, False
            refs[i] = hit
        return refs[-1], True

    @property
    def access_count(self) -> int:
        if self.k == 1:
            return 0
        return sum(t.access_count for t in self._tables)

    def stats(self) -> TreeDbStats:
        if self.k == 1:
            n = len(self._unit)
            return TreeDbStats(
                mode=self.mode, k=1, states=n, entries=n, ref_bits=self.ref_bits,
                tag_bits=0, overhead_words=0, entries_per_level=[n],
            )
        shape = self._shape
        per_level = [0] * shape.height
        for node, table in enumerate(self._tables):
            per_level[shape.levels[node]] += len(table)
        entries = sum(per_level)
        return TreeDbStats(
            mode=self.mode,
            k=self.k,
            states=len(self._tables[shape.root]),
            entries=entries,
            ref_bits=self.ref_bits,
            tag_bits=0,
            overhead_words=entries,  # one stable-index reference per entry
            entries_per_level=per_level,
        )

    def dump(self, out) -> None:
        """Per-position dump: ``position\\tindex\\tleft\\tright`` lines."""
        for node, table in enumerate(self._tables):
            for i, (left, right) in enumerate(table.pairs):
                out.write(f"{node}\t{i}\t{left}\t{right}\n")


class ConcurrentTreeDb:
    """Merged-table tree database with root tags. Thread-safe."""

    mode = "concurrent"

    def __init__(self, k: int, config: TableConfig | None = None, table: NodeTable | None = None):
        if k < 1:
            raise ConfigError(f"vector length must be >= 1, got {k}")
        self.k = k
        if k == 1:
            self._unit = _UnitStore()
            self.table = None
            self.ref_bits = (config or TableConfig()).ref_bits
            return
        self.table = table if table is not None else NodeTable(config or TableConfig())
        self.ref_bits = self.table.config.ref_bits
        self._shape = tree_shape(k)
        self.reserved_slot = (1 << self.ref_bits) - 1

    def find_or_put(self, vector) -> tuple[int, bool]:
        """Store the vector; return its root reference and seen-status.

        The verdict comes from the root tag flip, not from the table's
        membership answer, so pair collisions between root and internal
        positions cannot misreport a new vector as seen.
        """
        k = self.k
        if len(vector) != k:
            raise ValueError(f"expected a vector of length {k}, got {len(vector)}")
        if k == 1:
            return self._unit.find_or_put(vector[0])
        shape = self._shape
        lsrc = shape.left_src
        rsrc = shape.right_src
        fop = self.table.find_or_put
        refs = [0] * (k - 1)
        for i in range(k - 1):
            ls = lsrc[i]
            rs = rsrc[i]
            left = vector[~ls] if ls < 0 else refs[ls]
            right = vector[~rs] if rs < 0 else refs[rs]
            refs[i] = fop(left, right)[0]
        root = refs[k - 2]
        is_new = self.table.tag_root(root)
        return root, not is_new

    def get(self, ref: int):
        """Reconstruct the vector stored under a root reference."""
        k = self.k
        if k == 1:
            if ref not in self._unit:
                raise InvalidReferenceError(f"value {ref} was never stored")
            return (ref,)
        if not self.table.occupied(ref) or not self.table.is_root(ref):
            raise InvalidReferenceError(f"reference {ref} is not a tagged root")
        shape = self._shape
        tget = self.table.get
        out = [0] * k
        stack = [(shape.root, ref)]
        while stack:
            node, r = stack.pop()
            left, right = tget(r)
            ls = shape.left_src[node]
            rs = shape.right_src[node]
            if ls < 0:
                out[~ls] = left
            else:
                stack.append((ls, left))
            if rs < 0:
                out[~rs] = right
            else:
                stack.append((rs, right))
        return tuple(out)

    def bootstrap(self):
        """Imaginary predecessor for incremental insertion of initial states.

        Its slots hold the reserved value, which differs from every
        slot of every real vector, so the first incremental insert
        touches all k-1 positions and fills the reference tree.
        """
        if self.k == 1:
            return (self.reserved_slot,), []
        return (self.reserved_slot,) * self.k, [-1] * (self.k - 1)

    def find_or_put_incremental(self, vector, predecessor, predecessor_refs, out=None):
        """Insert ``vector`` given its predecessor and that one's reference tree.

        Returns ``(ref, seen, new_refs)`` with the same observable
        result as :meth:`find_or_put`; the table is only accessed on
        tree paths that cover slots where ``vector`` differs from
        ``predecessor``. ``out`` may supply a list to reuse for the new
        reference tree.
        """
        k = self.k
        if len(vector) != k or len(predecessor) != k:
            raise ValueError(f"expected vectors of length {k}")
        if k == 1:
            ref, seen = self._unit.find_or_put(vector[0])
            return ref, seen, []
        shape = self._shape
        lsrc = shape.left_src
        rsrc = shape.right_src
        fop = self.table.find_or_put
        if out is None:
            new_refs = list(predecessor_refs)
        else:
            new_refs = out
            new_refs[:] = predecessor_refs
        same = [False] * (k - 1)
        for i in range(k - 1):
            ls = lsrc[i]
            rs = rsrc[i]
            if ls < 0:
                s = ~ls
                left = vector[s]
                left_same = left == predecessor[s]
            else:
                left = new_refs[ls]
                left_same = same[ls]
            if rs < 0:
                s = ~rs
                right = vector[s]
                right_same = right == predecessor[s]
            else:
                right = new_refs[rs]
                right_same = same[rs]
            if left_same and right_same:
                same[i] = True
            else:
                new_refs[i] = fop(left, right)[0]
        root = new_refs[k - 2]
        if same[k - 2]:
            # Vector equals its predecessor; that one was stored already.
            return root, True, new_refs
        is_new = self.table.tag_root(root)
        return root, not is_new, new_refs

    @property
    def access_count(self) -> int:
        return 0 if self.k == 1 else self.table.access_count

    def stats(self) -> TreeDbStats:
        if self.k == 1:
            n = len(self._unit)
            return TreeDbStats(
                mode=self.mode, k=1, states=n, entries=n, ref_bits=self.ref_bits,
                tag_bits=0, overhead_words=0,
            )
        t = self.table.stats()
        return TreeDbStats(
            mode=self.mode,
            k=self.k,
            states=t.roots,
            entries=t.entries,
            ref_bits=self.ref_bits,
            tag_bits=1,
            overhead_words=0,
            table=t,
        )

    def dump(self, out) -> None:
        """Merged-table dump: ``index\\tleft\\tright\\ttag`` lines."""
        if self.k == 1:
            for v in sorted(self._unit._values):
                out.write(f"{v}\t{v}\t0\t1\n")
            return
        self.table.dump(out)


def create_tree_db(k: int, mode: str = "concurrent", config: TableConfig | None = None):
    """Factory over the database flavours ('basic' or 'concurrent')."""
    if mode == "basic":
        ref_bits = (config or TableConfig()).ref_bits
        return BasicTreeDb(k, ref_bits=ref_bits)
    if mode in ("concurrent", "incremental"):
        return ConcurrentTreeDb(k, config=config)
    raise ConfigError(f"unknown tree database mode {mode!r}")
