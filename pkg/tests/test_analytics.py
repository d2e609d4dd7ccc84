import json
from fractions import Fraction

from treedb import (
    BasicTreeDb,
    CollapseDb,
    CollapseLayout,
    ConcurrentTreeDb,
    PlainHashStore,
    TableConfig,
    identical_slots,
    insert_all,
    measure,
    uniform_slots,
)
from treedb.analytics import (
    collapse_best_ratio,
    collapse_worst_ratio,
    cross_expected_entries,
    identical_expected_entries,
    optimal_level_series,
    tree_best_ratio,
    tree_cross_ratio,
    tree_worst_ratio,
    uniform_expected_entries,
    uniform_expected_level_entries,
)


class TestFormulas:
    def test_bound_table(self):
        # The two structures bracket each other: the tree's worst case
        # is at least as bad, its best case better.
        for k in (4, 8, 16, 32):
            p = 2
            assert tree_worst_ratio(k) == 2 - Fraction(2, k)
            assert collapse_worst_ratio(p, k) == 1 + Fraction(p, k)
            assert tree_worst_ratio(k) >= collapse_worst_ratio(p, k)
            assert tree_best_ratio(k) == Fraction(2, k) == collapse_best_ratio(2, k)
            assert tree_best_ratio(k) < collapse_best_ratio(4, k)

    def test_cross_ratio_algebra(self):
        # 2/k + 2/m - 4/(mk) == (2m^2 + 2m(k-2)) / (m^2 k)
        for k, m in ((8, 16), (16, 64)):
            n = m * m
            words = 2 * n + 2 * m * (k - 2)
            assert tree_cross_ratio(k, m) == Fraction(words, n * k)

    def test_uniform_level_series(self):
        assert uniform_expected_level_entries(4, 8) == [65536, 512, 64]
        assert uniform_expected_entries(4, 8) == 66112
        floats = optimal_level_series(65536, 8)
        assert floats[0] == 65536 and abs(floats[1] - 512) < 1e-6

    def test_worst_case_strictly_below_two(self):
        for k in range(2, 128):
            assert 0 < tree_worst_ratio(k) < 2


class TestMeasure:
    def test_hashtable_ratio_is_one(self):
        store = PlainHashStore(6)
        insert_all(store, identical_slots(100, 6).initial_states)
        stats = measure(store)
        assert stats.ratio == 1.0
        assert stats.words_compressed == stats.words_plain == 600
        assert stats.per_state_bytes == 24.0

    def test_basic_tree_counters(self):
        db = BasicTreeDb(4)
        insert_all(db, identical_slots(200, 4).initial_states)
        stats = measure(db)
        assert stats.entries_total == identical_expected_entries(200, 4)
        assert stats.words_compressed == 2 * stats.entries_total
        assert stats.overhead_words == stats.entries_total
        assert stats.entries_per_level == [200, 400]  # root, then both leaf positions
        assert stats.ratio_fraction() == tree_worst_ratio(4)

    def test_merged_tree_bytes_include_tag(self):
        db = ConcurrentTreeDb(4, config=TableConfig(capacity=1 << 12))
        db.find_or_put((1, 2, 3, 4))
        stats = measure(db)
        assert stats.entries_total == 3
        assert stats.bytes_actual == 3 * (2 * 32 + 1) / 8
        assert stats.backing_bytes == 16 * (1 << 12)
        assert stats.tag_bits == 1

    def test_uniform_basic_matches_combinatorics(self):
        db = BasicTreeDb(8)
        insert_all(db, uniform_slots(2, 8).initial_states)
        stats = measure(db)
        assert stats.entries_per_level == uniform_expected_level_entries(2, 8)

    def test_collapse_counters(self):
        db = CollapseDb(CollapseLayout(blocks=(2, 2)))
        insert_all(db, [(1, 2, 3, 4), (1, 2, 5, 6)])
        stats = measure(db)
        assert stats.words_compressed == 3 * 2 + 2 * 2  # block rows + root tuples
        assert stats.n == 2

    def test_ratio_recomputable_from_counters(self):
        db = BasicTreeDb(8)
        insert_all(db, identical_slots(64, 8).initial_states)
        payload = json.loads(json.dumps(measure(db).to_dict()))
        assert payload["ratio"] == payload["words_compressed"] / payload["words_plain"]
        assert payload["per_state_bytes"] == payload["bytes_actual"] / payload["n"]
