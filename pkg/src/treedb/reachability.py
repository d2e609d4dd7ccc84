"""Parallel reachability over a shared closed-set store.

N worker threads share one store; each owns an open set (stack or
queue per the configured search order). All initial states are seeded
into worker 0's open set; idle workers obtain work through synchronous
random polling: they queue a request with a uniformly random peer and
wait, and working peers answer requests between work chunks by handing
over half of their open set. Global termination is declared exactly
when every worker is idle and no handed-over batch is pending, so no
work is lost and exploration never returns early.

The open set carries one of three payloads: whole vectors, root
references (resolved through ``store.get`` when popped), or
(vector, reference tree) pairs driving the incremental insert path of
the tree database. Visit counts are payload-, order- and
N-independent because the store's seen/new verdict admits each state
into exactly one open set.
"""

from __future__ import annotations

import random
import sys
import threading
import time
from collections import deque
from dataclasses import dataclass, field

from .errors import CapacityError, ConfigError
from .model import Model, Vector
from .stores import STORE_KINDS, make_store
from .tree import ConcurrentTreeDb

PAYLOADS = ("vector", "ref", "reftree")


@dataclass
class ReachabilityConfig:
    workers: int = 1
    order: str = "stack"
    chunk_max: int = 100  # successor evaluations between balance polls
    store: str = "tree"
    payload: str | None = None  # default: reftree for tree-incremental, else vector
    table_bits: int = 20
    ref_bits: int = 32
    load_factor: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.order not in ("stack", "queue"):
            raise ConfigError(f"order must be 'stack' or 'queue', got {self.order!r}")
        if self.chunk_max < 1:
            raise ConfigError(f"chunk_max must be >= 1, got {self.chunk_max}")
        if self.store not in STORE_KINDS:
            raise ConfigError(f"unknown store {self.store!r}; expected one of {STORE_KINDS}")
        if self.payload is None:
            self.payload = "reftree" if self.store == "tree-incremental" else "vector"
        if self.payload not in PAYLOADS:
            raise ConfigError(f"unknown payload {self.payload!r}; expected one of {PAYLOADS}")
        if self.store in ("collapse", "tree-basic") and self.workers != 1:
            raise ConfigError(f"store {self.store!r} is sequential; use --workers 1")
        if (self.payload == "reftree") != (self.store == "tree-incremental"):
            raise ConfigError("payload 'reftree' is tied to store 'tree-incremental'")


@dataclass
class WorkerCounters:
    worker: int
    expanded: int = 0
    enqueued: int = 0
    transitions: int = 0
    deadlocks: int = 0
    batches_sent: int = 0
    batches_received: int = 0
    open_set_peak: int = 0


@dataclass
class ExplorationReport:
    model: str
    states: int
    transitions: int
    deadlocks: int
    wall_time: float
    workers: int
    order: str
    store: str
    payload: str
    payload_words: int
    open_set_peak: int
    aborted: bool = False
    abort_reason: str | None = None
    first_deadlock: Vector | None = None
    per_worker: list[WorkerCounters] = field(default_factory=list)


class _Balancer:
    """Work handoff and termination detection for N workers.

    All shared state lives behind one lock; waits are timed so a
    requester whose victim went idle re-polls another peer. Termination
    is declared under the lock when all workers are idle and no grant
    is pending, which implies every open set is empty.
    """

    POLL_TIMEOUT = 0.002

    def __init__(self, n: int, seed: int):
        self.n = n
        self.lock = threading.Lock()
        self.cond = threading.Condition(self.lock)
        self.idle = 0
        self.waiting = [False] * n
        self.grants: list[list | None] = [None] * n
        self.requests: list[list[int]] = [[] for _ in range(n)]
        self.has_requests = [False] * n  # lock-free hint checked by busy workers
        self.terminated = False
        self.failure: BaseException | None = None
        self.rngs = [random.Random((seed << 8) ^ wid) for wid in range(n)]

    def serve(self, wid: int, take_batch, counters: WorkerCounters) -> None:
        """Answer pending steal requests from this worker's open set."""
        with self.lock:
            reqs = self.requests[wid]
            while reqs:
                requester = reqs.pop()
                if not self.waiting[requester] or self.grants[requester] is not None:
                    continue  # stale: requester got work elsewhere
                batch = take_batch()
                if not batch:
                    reqs.append(requester)
                    break
                self.grants[requester] = batch
                counters.batches_sent += 1
                self.cond.notify_all()
            self.has_requests[wid] = bool(reqs)

    def acquire(self, wid: int) -> list | None:
        """Wait for handed-over work; None means global termination."""
        rng = self.rngs[wid]
        with self.lock:
            self.idle += 1
            self.waiting[wid] = True
            try:
                while True:
                    if self.terminated or self.failure is not None:
                        return None
                    batch = self.grants[wid]
                    if batch is not None:
                        self.grants[wid] = None
                        self.idle -= 1
                        return batch
                    if self.idle == self.n and not any(
                        g is not None for g in self.grants
                    ):
                        self.terminated = True
                        self.cond.notify_all()
                        return None
                    # Poll a uniformly random peer among those that can
                    # actually answer (idle peers have nothing to give).
                    busy = [i for i in range(self.n) if i != wid and not self.waiting[i]]
                    if busy:
                        victim = busy[rng.randrange(len(busy))]
                        self.requests[victim].append(wid)
                        self.has_requests[victim] = True
                    self.cond.wait(timeout=self.POLL_TIMEOUT)
            finally:
                self.waiting[wid] = False

    def fail(self, exc: BaseException) -> None:
        with self.lock:
            if self.failure is None:
                self.failure = exc
            self.cond.notify_all()


def payload_words_per_entry(payload: str, k: int) -> int:
    """Open-set entry width in b-bit words, excluding container bookkeeping."""
    if payload == "vector":
        return k
    if payload == "ref":
        return 1
    return k + max(k - 1, 0)  # vector plus its reference tree


class _Worker:
    def __init__(self, wid: int, model: Model, store, config: ReachabilityConfig,
                 balancer: _Balancer):
        self.wid = wid
        self.model = model
        self.store = store
        self.config = config
        self.balancer = balancer
        self.open: deque = deque()
        self.counters = WorkerCounters(worker=wid)
        self.first_deadlock: Vector | None = None
        if config.order == "stack":
            self.pop = self.open.pop
            self.steal_one = self.open.popleft
        else:
            self.pop = self.open.popleft
            self.steal_one = self.open.pop

    def take_batch(self) -> list:
        half = len(self.open) // 2
        return [self.steal_one() for _ in range(half)]

    def run(self) -> None:
        try:
            self._loop()
        except BaseException as exc:  # propagate to peers and the driver
            self.balancer.fail(exc)

    def _loop(self) -> None:
        balancer = self.balancer
        counters = self.counters
        open_set = self.open
        chunk_max = self.config.chunk_max
        payload = self.config.payload
        next_state = self.model.next_state
        store = self.store
        pop = self.pop

        while True:
            if balancer.failure is not None:
                return
            if open_set:
                if balancer.has_requests[self.wid]:
                    balancer.serve(self.wid, self.take_batch, counters)
            else:
                batch = balancer.acquire(self.wid)
                if batch is None:
                    return
                open_set.extend(batch)
                counters.batches_received += 1

            work = 0
            while work < chunk_max and open_set:
                item = pop()
                counters.expanded += 1
                if payload == "vector":
                    state = item
                    count = 0
                    for succ in next_state(state):
                        count += 1
                        work += 1
                        _ref, seen = store.find_or_put(succ)
                        if not seen:
                            open_set.append(succ)
                elif payload == "ref":
                    state = store.get(item)
                    count = 0
                    for succ in next_state(state):
                        count += 1
                        work += 1
                        ref, seen = store.find_or_put(succ)
                        if not seen:
                            open_set.append(ref)
                else:  # reftree
                    state, refs = item
                    count = 0
                    for succ in next_state(state):
                        count += 1
                        work += 1
                        _ref, seen, new_refs = store.find_or_put_incremental(
                            succ, state, refs
                        )
                        if not seen:
                            open_set.append((succ, new_refs))
                counters.transitions += count
                if count == 0:
                    counters.deadlocks += 1
                    if self.first_deadlock is None:
                        self.first_deadlock = state
            if len(open_set) > counters.open_set_peak:
                counters.open_set_peak = len(open_set)


def _seed(worker: _Worker, model: Model, store, payload: str) -> None:
    if payload == "reftree":
        pred, pred_refs = store.bootstrap()
        for state in model.initial_states:
            _ref, seen, refs = store.find_or_put_incremental(state, pred, pred_refs)
            if not seen:
                worker.open.append((state, refs))
    else:
        for state in model.initial_states:
            ref, seen = store.find_or_put(state)
            if not seen:
                worker.open.append(state if payload == "vector" else ref)
    worker.counters.open_set_peak = len(worker.open)


def _distinct_states(store) -> int:
    stats = store.stats()
    return getattr(stats, "states", 0)


def explore(model: Model, config: ReachabilityConfig | None = None,
            store=None) -> ExplorationReport:
    """Explore all states reachable from the model's initial states.

    Every reachable state is inserted into the store exactly once;
    state, transition and deadlock counts do not depend on the worker
    count, search order or open-set payload. A store that runs out of
    capacity aborts the run: the report is flagged and its counts are
    partial.
    """
    config = config or ReachabilityConfig()
    if config.store == "tree-incremental" and store is not None:
        if not isinstance(store, ConcurrentTreeDb):
            raise ConfigError("the incremental coupling needs a concurrent tree store")
    if store is None:
        store = make_store(
            config.store, model, table_bits=config.table_bits,
            ref_bits=config.ref_bits, load_factor=config.load_factor,
        )

    balancer = _Balancer(config.workers, config.seed)
    workers = [
        _Worker(wid, model, store, config, balancer) for wid in range(config.workers)
    ]

    start = time.perf_counter()
    aborted = False
    abort_reason = None
    try:
        _seed(workers[0], model, store, config.payload)
    except CapacityError as exc:
        aborted = True
        abort_reason = str(exc)

    if not aborted:
        threads = [
            threading.Thread(target=w.run, name=f"explore-{w.wid}", daemon=True)
            for w in workers
        ]
        # Steal requests are answered at chunk boundaries; a finer
        # interpreter switch interval keeps idle workers from sitting
        # out whole scheduling quanta waiting for a grant.
        old_interval = sys.getswitchinterval()
        if config.workers > 1:
            sys.setswitchinterval(0.0005)
        try:
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        finally:
            if config.workers > 1:
                sys.setswitchinterval(old_interval)
        if balancer.failure is not None:
            if isinstance(balancer.failure, CapacityError):
                aborted = True
                abort_reason = str(balancer.failure)
            else:
                raise balancer.failure
    wall = time.perf_counter() - start

    first_deadlock = None
    for w in workers:
        if w.first_deadlock is not None:
            first_deadlock = w.first_deadlock
            break

    return ExplorationReport(
        model=model.name,
        states=_distinct_states(store),
        transitions=sum(w.counters.transitions for w in workers),
        deadlocks=sum(w.counters.deadlocks for w in workers),
        wall_time=wall,
        workers=config.workers,
        order=config.order,
        store=config.store,
        payload=config.payload,
        payload_words=payload_words_per_entry(config.payload, model.k),
        open_set_peak=sum(w.counters.open_set_peak for w in workers),
        aborted=aborted,
        abort_reason=abort_reason,
        first_deadlock=first_deadlock,
        per_worker=[w.counters for w in workers],
    )
