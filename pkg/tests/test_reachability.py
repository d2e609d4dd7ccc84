import threading

import pytest

from treedb import (
    CapacityError,
    ConfigError,
    ConcurrentTreeDb,
    Model,
    ReachabilityConfig,
    TableConfig,
    explore,
    load_model,
)
from treedb.bundled import load_bundled
from treedb.reachability import payload_words_per_entry

COUNTER = load_bundled("counter")
ORACLE = (12, 17, 1)  # states, transitions, deadlocks of the 4x3 grid


def counts(report):
    return report.states, report.transitions, report.deadlocks


class TestCounts:
    def test_counter_oracle(self):
        rep = explore(COUNTER, ReachabilityConfig(workers=1, store="tree", table_bits=10))
        assert counts(rep) == ORACLE
        assert rep.first_deadlock == (3, 2)

    @pytest.mark.parametrize("workers", [1, 2, 4, 8])
    @pytest.mark.parametrize("order", ["stack", "queue"])
    def test_invariant_across_workers_and_order(self, workers, order):
        rep = explore(
            COUNTER,
            ReachabilityConfig(workers=workers, order=order, store="tree", table_bits=10),
        )
        assert counts(rep) == ORACLE

    @pytest.mark.parametrize(
        "store,payload",
        [
            ("hashtable", "vector"),
            ("tree", "vector"),
            ("tree", "ref"),
            ("tree-basic", "vector"),
            ("tree-incremental", "reftree"),
            ("collapse", "vector"),
        ],
    )
    def test_invariant_across_couplings(self, store, payload):
        workers = 1 if store in ("collapse", "tree-basic") else 4
        rep = explore(
            COUNTER,
            ReachabilityConfig(workers=workers, store=store, payload=payload, table_bits=10),
        )
        assert counts(rep) == ORACLE

    def test_states_equal_store_count(self):
        store = ConcurrentTreeDb(COUNTER.k, config=TableConfig(capacity=1 << 10))
        rep = explore(COUNTER, ReachabilityConfig(workers=2, store="tree", table_bits=10),
                      store=store)
        assert rep.states == store.stats().states == 12


class TestOrders:
    def make_branching_model(self):
        # 0 branches to 1 and 2; both reach 3. Distinguishes DFS/BFS.
        def next_state(v):
            return {0: [(1,), (2,)], 1: [(3,)], 2: [(3,)], 3: []}[v[0]]

        return Model(k=1, initial_states=((0,),), next_state=next_state)

    def record_visits(self, order):
        visits = []
        base = self.make_branching_model()

        def recording(v):
            visits.append(v)
            return base.next_state(v)

        model = Model(k=1, initial_states=base.initial_states, next_state=recording)
        explore(model, ReachabilityConfig(workers=1, order=order, store="hashtable"))
        return visits

    def test_stack_is_depth_first(self):
        assert self.record_visits("stack") == [(0,), (2,), (3,), (1,)]

    def test_queue_is_breadth_first(self):
        assert self.record_visits("queue") == [(0,), (1,), (2,), (3,)]

    def test_payload_width_arithmetic(self):
        assert payload_words_per_entry("vector", 8) == 8
        assert payload_words_per_entry("ref", 8) == 1
        assert payload_words_per_entry("reftree", 8) == 15
        rep_v = explore(COUNTER, ReachabilityConfig(workers=1, store="tree", table_bits=10))
        rep_r = explore(
            COUNTER,
            ReachabilityConfig(workers=1, store="tree", payload="ref", table_bits=10),
        )
        assert rep_v.payload_words == COUNTER.k
        assert rep_r.payload_words == 1


class TestBalancing:
    def test_work_spreads_from_single_seed(self):
        model = load_bundled("counters4")  # 1e4 states
        rep = explore(
            model,
            ReachabilityConfig(workers=8, store="tree", table_bits=16, chunk_max=50),
        )
        assert rep.states == 10_000
        assert all(w.expanded > 0 for w in rep.per_worker)
        assert sum(w.batches_received for w in rep.per_worker) > 0

    @pytest.mark.parametrize("chunk", [1, 100, 10_000])
    def test_terminates_for_any_chunk_size(self, chunk):
        rep = explore(
            COUNTER,
            ReachabilityConfig(workers=4, store="tree", table_bits=10, chunk_max=chunk),
        )
        assert counts(rep) == ORACLE

    def test_every_inserted_state_was_expanded(self):
        model = load_bundled("ring4")
        expanded = set()
        lock = threading.Lock()
        base_next = model.next_state

        def tracking(v):
            with lock:
                expanded.add(v)
            return base_next(v)

        tracked = Model(k=model.k, initial_states=model.initial_states,
                        next_state=tracking)
        store = ConcurrentTreeDb(model.k, config=TableConfig(capacity=1 << 14))
        rep = explore(tracked, ReachabilityConfig(workers=4, store="tree", table_bits=14),
                      store=store)
        assert rep.states == len(expanded) == 1024

    def test_incremental_coupling_matches_ref_coupling_bytewise(self):
        model = load_bundled("buffer")
        ref_store = ConcurrentTreeDb(model.k, config=TableConfig(capacity=1 << 12))
        explore(model, ReachabilityConfig(workers=1, store="tree", payload="ref",
                                          table_bits=12), store=ref_store)
        incr_store = ConcurrentTreeDb(model.k, config=TableConfig(capacity=1 << 12))
        explore(model, ReachabilityConfig(workers=1, store="tree-incremental",
                                          table_bits=12), store=incr_store)
        assert ref_store.table.raw_words() == incr_store.table.raw_words()


class TestValidationAndAbort:
    def test_collapse_is_sequential_only(self):
        with pytest.raises(ConfigError):
            ReachabilityConfig(workers=4, store="collapse")

    def test_reftree_requires_incremental_store(self):
        with pytest.raises(ConfigError):
            ReachabilityConfig(store="tree", payload="reftree")
        with pytest.raises(ConfigError):
            ReachabilityConfig(store="tree-incremental", payload="vector")

    def test_capacity_abort_flags_partial_counts(self):
        model = load_bundled("counters4")
        rep = explore(
            model, ReachabilityConfig(workers=2, store="tree", table_bits=5)
        )
        assert rep.aborted
        assert rep.abort_reason and "table" in rep.abort_reason
        assert rep.states < 10_000

    def test_unexpected_worker_errors_propagate(self):
        def broken(_v):
            raise RuntimeError("boom")

        model = Model(k=2, initial_states=((0, 0),), next_state=broken)
        with pytest.raises(RuntimeError):
            explore(model, ReachabilityConfig(workers=2, store="hashtable"))


class TestEnumerationModels:
    def test_insert_only_workload(self):
        model = load_model("var a : 0..0 = 0;\nvar b : 0..0 = 0;")
        # An enumeration-style model: the single initial state deadlocks.
        rep = explore(model, ReachabilityConfig(workers=1, store="tree", table_bits=8))
        assert counts(rep) == (1, 0, 1)
