"""Compression accounting and the closed-form ratio predictions.

Sizes are counted in b-bit words: a tree node entry is two words, a
process-table block entry is its block width in words, a root tuple is
one word per block, and a plain hash table entry is k words. The
compression ratio is compressed words over plain words (n*k); it is
computed exactly as a Fraction so the synthetic scenarios can be
checked against the predictions without tolerance.

Byte figures carry the per-entry tag bit and the stable-indexing side
references where they exist, so implementation overhead stays visible
next to the word-unit accounting. The backing buffer of the merged
table (16 bytes per slot including alignment slack, times capacity) is
reported separately as allocation footprint.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

from .collapse import CollapseStats
from .stores import PlainStoreStats
from .tree import TreeDbStats


@dataclass
class CompressionStats:
    """Derived compression figures for one store after one workload."""

    store: str
    n: int
    k: int
    entries_total: int
    words_compressed: int
    words_plain: int
    ratio: float
    per_state_words: float
    bytes_actual: float  # entry payload incl. tag bits
    per_state_bytes: float
    overhead_words: int  # stable-index side references (outside the ratio)
    ref_bits: int
    tag_bits: int
    entries_per_level: list[int] | None = None
    entries_per_block: list[tuple[int, int]] | None = None
    backing_bytes: int | None = None
    entry_stride_bytes: int | None = None

    def ratio_fraction(self) -> Fraction:
        return Fraction(self.words_compressed, self.words_plain)

    def to_dict(self) -> dict:
        return asdict(self)


def _finish(store: str, n: int, k: int, entries: int, words: int, bits_per_entry_num: int,
            entries_for_bytes: int, overhead_words: int, ref_bits: int, tag_bits: int,
            **extra) -> CompressionStats:
    words_plain = n * k
    byte_total = entries_for_bytes * bits_per_entry_num / 8
    return CompressionStats(
        store=store,
        n=n,
        k=k,
        entries_total=entries,
        words_compressed=words,
        words_plain=words_plain,
        ratio=words / words_plain if words_plain else 0.0,
        per_state_words=words / n if n else 0.0,
        bytes_actual=byte_total,
        per_state_bytes=byte_total / n if n else 0.0,
        overhead_words=overhead_words,
        ref_bits=ref_bits,
        tag_bits=tag_bits,
        **extra,
    )


def measure(store) -> CompressionStats:
    """Compression figures from a store's raw counters."""
    raw = store.stats()
    if isinstance(raw, TreeDbStats):
        b = raw.ref_bits
        if raw.k == 1:
            # Degenerate store: one word per distinct value.
            return _finish(
                "tree-" + raw.mode if raw.mode == "basic" else "tree",
                raw.states, 1, raw.entries, raw.states, b, raw.states, 0, b, 0,
            )
        words = 2 * raw.entries
        name = "tree-basic" if raw.mode == "basic" else "tree"
        extra = {"entries_per_level": raw.entries_per_level}
        if raw.table is not None:
            extra["backing_bytes"] = raw.table.backing_bytes
            extra["entry_stride_bytes"] = raw.table.entry_stride_bytes
        # Basic mode pays one extra b-bit side reference per entry; the
        # merged table pays one tag bit per entry.
        bits = 2 * b + raw.tag_bits + (b if raw.mode == "basic" else 0)
        return _finish(
            name, raw.states, raw.k, raw.entries, words, bits, raw.entries,
            raw.overhead_words, b, raw.tag_bits, **extra,
        )
    if isinstance(raw, CollapseStats):
        b = raw.ref_bits
        block_words = sum(width * count for width, count in raw.table_entries)
        root_words = len(raw.block_widths) * raw.root_entries
        words = block_words + root_words
        entries = raw.root_entries + sum(count for _w, count in raw.table_entries)
        return _finish(
            "collapse", raw.states, raw.k, entries, words, b, words,
            entries, b, 0, entries_per_block=raw.table_entries,
        )
    if isinstance(raw, PlainStoreStats):
        b = raw.ref_bits
        words = raw.states * raw.k
        return _finish(
            "hashtable", raw.states, raw.k, raw.states, words, b * raw.k,
            raw.states, 0, b, 0,
        )
    raise TypeError(f"cannot measure stats of type {type(raw).__name__}")


# -- closed-form predictions -----------------------------------------


def tree_worst_ratio(k: int) -> Fraction:
    """Repeated-slot sets: k-1 entries per vector, no cross-vector sharing."""
    return 2 - Fraction(2, k)


def tree_cross_ratio(k: int, m: int) -> Fraction:
    """Cross product of m half-vectors: root grows as m^2, subtrees as m."""
    return Fraction(2, k) + Fraction(2, m) - Fraction(4, m * k)


def tree_best_ratio(k: int) -> Fraction:
    """Large-n limit when every position stores a cross product."""
    return Fraction(2, k)


def collapse_worst_ratio(p: int, k: int) -> Fraction:
    """Every vector unique inside every block."""
    return 1 + Fraction(p, k)


def collapse_best_ratio(p: int, k: int) -> Fraction:
    """Large-n limit for p symmetric processes."""
    return Fraction(p, k)


def identical_expected_entries(n: int, k: int) -> int:
    return n * (k - 1)


def cross_expected_entries(m: int, j: int) -> int:
    return m * m + 2 * (j - 1) * m


def uniform_expected_level_entries(r: int, k: int) -> list[int]:
    """Entries per level, root first: 2^d tree positions of r^(k/2^d) tuples."""
    if k & (k - 1) or k < 2:
        raise ValueError(f"k must be a power of two >= 2, got {k}")
    out = []
    nodes, span = 1, k
    while span >= 2:
        out.append(nodes * r**span)
        nodes *= 2
        span //= 2
    return out


def uniform_expected_entries(r: int, k: int) -> int:
    return sum(uniform_expected_level_entries(r, k))


def optimal_level_series(n: int, k: int) -> list[float]:
    """The optimal occupancy series n, 2*sqrt(n), 4*n^(1/4), ... (log2 k terms).

    Float-valued for plotting against measured occupancy; exact integer
    counts for the uniform scenario come from
    :func:`uniform_expected_level_entries`.
    """
    if k & (k - 1) or k < 2:
        raise ValueError(f"k must be a power of two >= 2, got {k}")
    out = []
    nodes, span = 1, k
    while span >= 2:
        out.append(nodes * n ** (1.0 / nodes))
        nodes *= 2
        span //= 2
    return out


def symmetric_expected_words(q: int, p: int, m: int) -> int:
    """Process-table size for p symmetric blocks sharing one table.

    Root: p words for each of the q^p states; shared block table: q
    rows of m words. In the large-n limit the ratio approaches p/k.
    """
    return p * q**p + m * q


def cross_expected_words(m: int, j: int) -> int:
    return 2 * cross_expected_entries(m, j)


def identical_expected_words(n: int, k: int) -> int:
    return 2 * identical_expected_entries(n, k)
