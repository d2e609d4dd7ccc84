from fractions import Fraction

import pytest

from treedb import (
    CollapseDb,
    CollapseLayout,
    ConfigError,
    ConcurrentTreeDb,
    TableConfig,
    identical_slots,
    insert_all,
    measure,
    symmetric_blocks,
)
from treedb.analytics import collapse_worst_ratio, symmetric_expected_words


class TestLayout:
    def test_two_equal_blocks(self):
        db = CollapseDb(CollapseLayout(blocks=(4, 4)))
        assert len(db._tables) == 2
        assert db._root.width == 2

    def test_single_block_degenerates(self):
        db = CollapseDb(CollapseLayout(blocks=(3,)))
        ref, seen = db.find_or_put((1, 2, 3))
        assert not seen and db.get(ref) == (1, 2, 3)
        assert db._root.width == 1

    def test_three_process_system_layout(self):
        # X(a,b,c,d) with Y(p,q) and Z(u,v): widths 4, 2, 2.
        layout = CollapseLayout(blocks=(4, 2, 2))
        assert layout.p == 3 and layout.k == 8
        db = CollapseDb(layout)
        db.find_or_put((1, 2, 3, 4, 5, 6, 7, 8))
        assert [t.width for t in db._block_tables] == [4, 2, 2]

    def test_invalid_layouts(self):
        with pytest.raises(ConfigError):
            CollapseLayout(blocks=())
        with pytest.raises(ConfigError):
            CollapseLayout(blocks=(2, 0))
        with pytest.raises(ConfigError):
            CollapseLayout(blocks=(2, 3), groups=(0, 0))  # widths differ


class TestFindOrPut:
    def test_blocks_shared_between_similar_vectors(self):
        db = CollapseDb(CollapseLayout(blocks=(2, 2)))
        db.find_or_put((1, 2, 3, 4))
        db.find_or_put((1, 2, 9, 9))  # differs only inside block 1
        stats = db.stats()
        entries = dict()
        for width, count in stats.table_entries:
            entries.setdefault(width, []).append(count)
        assert sorted(c for counts in entries.values() for c in counts) == [1, 2]
        assert stats.root_entries == 2

    def test_membership_matches_reference_set(self, rng):
        db = CollapseDb(CollapseLayout(blocks=(2, 3)))
        reference = set()
        for _ in range(3000):
            v = tuple(rng.getrandbits(4) for _ in range(5))
            _ref, seen = db.find_or_put(v)
            assert seen == (v in reference)
            reference.add(v)
        assert len(db) == len(reference)
        for v in list(reference)[:200]:
            assert v in db

    def test_get_reconstructs(self, rng):
        db = CollapseDb(CollapseLayout(blocks=(3, 1, 2)))
        vectors = {tuple(rng.getrandbits(6) for _ in range(6)) for _ in range(500)}
        refs = {db.find_or_put(v)[0]: v for v in vectors}
        for ref, v in refs.items():
            assert db.get(ref) == v


class TestRatios:
    def test_worst_case_exact(self):
        n, k, p = 500, 8, 2
        db = CollapseDb(CollapseLayout(blocks=(k // p,) * p))
        insert_all(db, identical_slots(n, k).initial_states)
        stats = measure(db)
        assert stats.ratio_fraction() == collapse_worst_ratio(p, k) == Fraction(5, 4)

    def test_symmetric_best_case_formula(self):
        q, p, m = 30, 2, 4
        model = symmetric_blocks(q, p, m)
        db = CollapseDb(CollapseLayout.for_model(model))
        insert_all(db, model.initial_states)
        stats = measure(db)
        assert stats.words_compressed == symmetric_expected_words(q, p, m)
        # One shared table for the symmetric processes.
        assert len(stats.entries_per_block) == 1

    def test_tree_not_worse_on_paired_run(self, rng):
        vectors = {tuple(rng.getrandbits(5) for _ in range(8)) for _ in range(2000)}
        tree = ConcurrentTreeDb(8, config=TableConfig(capacity=1 << 15))
        insert_all(tree, vectors)
        coll = CollapseDb(CollapseLayout(blocks=(4, 4)))
        insert_all(coll, vectors)
        assert measure(tree).per_state_words <= measure(coll).per_state_words
