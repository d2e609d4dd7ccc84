"""Process-table compressed store (the comparison baseline).

The state vector is partitioned into contiguous process blocks. Each
block's sub-vector is deduplicated in a block table; the tuple of block
references is deduplicated in a root table, whose answer is the
seen/new verdict. Blocks may share one table by carrying the same group
label (storage per process type); by default every block has its own.

All tables grow on demand and keep stable indices through a side list,
which is affordable here because this baseline is sequential-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, InvalidReferenceError
from .model import Model, Vector


@dataclass(frozen=True)
class CollapseLayout:
    """Partition of the k slots into contiguous blocks.

    ``groups[i]`` labels the table block i stores into; blocks with
    equal labels (allowed only at equal widths) share one table.
    """

    blocks: tuple[int, ...]
    groups: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.blocks or any(w < 1 for w in self.blocks):
            raise ConfigError(f"invalid block widths {self.blocks}")
        if not self.groups:
            object.__setattr__(self, "groups", tuple(range(len(self.blocks))))
        if len(self.groups) != len(self.blocks):
            raise ConfigError("groups must label every block")
        width_of: dict[int, int] = {}
        for w, g in zip(self.blocks, self.groups):
            if width_of.setdefault(g, w) != w:
                raise ConfigError(f"blocks sharing group {g} have different widths")

    @property
    def k(self) -> int:
        return sum(self.blocks)

    @property
    def p(self) -> int:
        return len(self.blocks)

    @classmethod
    def for_model(cls, model: Model) -> "CollapseLayout":
        """Layout from the model's declared processes; one block if none."""
        if model.process_layout is None:
            return cls(blocks=(model.k,))
        groups = model.layout_groups if getattr(model, "layout_groups", None) else ()
        return cls(blocks=tuple(model.process_layout), groups=tuple(groups))


class _SubVectorTable:
    """Growable table of fixed-width sub-vectors with stable indices."""

    __slots__ = ("width", "index", "rows")

    def __init__(self, width: int):
        self.width = width
        self.index: dict[tuple, int] = {}
        self.rows: list[tuple] = []

    def find_or_put(self, row: tuple) -> tuple[int, bool]:
        ref = self.index.get(row)
        if ref is not None:
            return ref, True
        ref = len(self.rows)
        self.index[row] = ref
        self.rows.append(row)
        return ref, False

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class CollapseStats:
    """Raw counters of a process-table store, exact at quiescence."""

    k: int
    states: int
    block_widths: tuple[int, ...]
    block_groups: tuple[int, ...]
    table_entries: list[tuple[int, int]]  # (width, entries) per distinct table
    root_entries: int
    ref_bits: int


class CollapseDb:
    """Sequential process-table store over a fixed layout."""

    mode = "collapse"

    def __init__(self, layout: CollapseLayout, ref_bits: int = 32):
        self.layout = layout
        self.k = layout.k
        self.ref_bits = ref_bits
        bounds = []
        lo = 0
        for w in layout.blocks:
            bounds.append((lo, lo + w))
            lo += w
        self._bounds = bounds
        tables: dict[int, _SubVectorTable] = {}
        for w, g in zip(layout.blocks, layout.groups):
            tables.setdefault(g, _SubVectorTable(w))
        self._tables = tables
        self._block_tables = [tables[g] for g in layout.groups]
        self._root = _SubVectorTable(layout.p)

    def find_or_put(self, vector) -> tuple[int, bool]:
        if len(vector) != self.k:
            raise ValueError(f"expected a vector of length {self.k}, got {len(vector)}")
        refs = tuple(
            table.find_or_put(tuple(vector[lo:hi]))[0]
            for table, (lo, hi) in zip(self._block_tables, self._bounds)
        )
        return self._root.find_or_put(refs)

    def get(self, ref: int) -> Vector:
        if not 0 <= ref < len(self._root.rows):
            raise InvalidReferenceError(f"reference {ref} out of range")
        refs = self._root.rows[ref]
        out: tuple = ()
        for table, block_ref in zip(self._block_tables, refs):
            out += table.rows[block_ref]
        return out

    def __contains__(self, vector) -> bool:
        refs = []
        for table, (lo, hi) in zip(self._block_tables, self._bounds):
            hit = table.index.get(tuple(vector[lo:hi]))
            if hit is None:
                return False
            refs.append(hit)
        return tuple(refs) in self._root.index

    def __len__(self) -> int:
        return len(self._root)

    def stats(self) -> CollapseStats:
        return CollapseStats(
            k=self.k,
            states=len(self._root),
            block_widths=self.layout.blocks,
            block_groups=self.layout.groups,
            table_entries=[(t.width, len(t)) for t in self._tables.values()],
            root_entries=len(self._root),
            ref_bits=self.ref_bits,
        )
