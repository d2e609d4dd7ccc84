"""State vectors, the model interface, and synthetic workload generators.

A state vector is a plain tuple of k unsigned slot values. A model
bundles the vector length, the initial states and a deterministic
successor function; exploration code never needs anything else.

Synthetic models deliver a known vector set as an enumeration: every
vector is an initial state and ``next_state`` is empty. The analysis
scenarios they realize have exact closed-form compression ratios, which
the test suite checks against measured counters:

``identical_slots(n, k)``
    n vectors of k equal slots. Tree worst case: no sharing between
    distinct vectors in a per-position table, k-1 entries per vector.

``cross_product(m, j)``
    All m*m concatenations of m base vectors of length j (so k = 2*j).
    Left and right subtrees are maximally reused; only the root grows
    quadratically.

``uniform_slots(r, k)``
    All r**k vectors over slot domain 1..r, k a power of two. Every
    position stores the full cross product of its children: the
    optimal case.

``symmetric_blocks(q, p, m)``
    All q**p combinations of p process-local blocks, each block one of
    q repeated-slot vectors of length m (k = p*m). The best case for
    process-table compression; the block tables are shared, matching
    per-process-type storage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

from .errors import ConfigError

Vector = tuple[int, ...]

#: Slot values must stay at or below this for 32-bit slots; the all-ones
#: value is reserved for the incremental bootstrap predecessor.
MAX_SLOT_VALUE = (1 << 32) - 2


@dataclass
class Model:
    """A transition system over fixed-length integer vectors.

    ``next_state`` must be a pure function: the same input vector
    always yields the same successor sequence, so explorations are
    reproducible regardless of scheduling.
    """

    k: int
    initial_states: tuple[Vector, ...]
    next_state: Callable[[Vector], Sequence[Vector]]
    process_layout: tuple[int, ...] | None = None
    #: optional share labels per block; equal labels store in one table
    layout_groups: tuple[int, ...] | None = None
    name: str = "model"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"vector length must be >= 1, got {self.k}")
        for v in self.initial_states:
            if len(v) != self.k:
                raise ConfigError(f"initial state {v} does not have length {self.k}")
        if self.process_layout is not None:
            if any(s < 1 for s in self.process_layout) or sum(self.process_layout) != self.k:
                raise ConfigError(
                    f"process layout {self.process_layout} does not partition {self.k} slots"
                )


def _no_successors(_state: Vector) -> tuple[Vector, ...]:
    return ()


def enumeration_model(vectors: Iterable[Vector], k: int, name: str,
                      process_layout: tuple[int, ...] | None = None,
                      layout_groups: tuple[int, ...] | None = None) -> Model:
    """Wrap a vector set as an insert-only model (empty successor function)."""
    return Model(
        k=k,
        initial_states=tuple(vectors),
        next_state=_no_successors,
        process_layout=process_layout,
        layout_groups=layout_groups,
        name=name,
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic scenario, as parsed from ``kind:key=val,...``."""

    kind: str
    params: dict[str, int] = field(default_factory=dict)

    _REQUIRED = {
        "identical": ("n", "k"),
        "identical_slots": ("n", "k"),
        "cross": ("m", "j|k"),
        "cross_product": ("m", "j|k"),
        "uniform": ("r", "k"),
        "uniform_slots": ("r", "k"),
        "symmetric": ("q", "p", "m"),
        "symmetric_blocks": ("q", "p", "m"),
    }

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind not in cls._REQUIRED:
            raise ConfigError(
                f"unknown synthetic kind {kind!r}; expected one of "
                "identical, cross, uniform, symmetric"
            )
        params: dict[str, int] = {}
        if rest:
            for item in rest.split(","):
                key, eq, val = item.partition("=")
                if not eq or not val.strip().lstrip("-").isdigit():
                    raise ConfigError(f"bad synthetic parameter {item!r} (want key=int)")
                params[key.strip()] = int(val)
        missing = [
            req for req in cls._REQUIRED[kind]
            if not any(alt in params for alt in req.split("|"))
        ]
        if missing:
            raise ConfigError(f"synthetic {kind!r} needs parameters: {', '.join(missing)}")
        return cls(kind=kind, params=params)


def identical_slots(n: int, k: int) -> Model:
    """n vectors of k identical slots: <s, s, ..., s> for s in 1..n."""
    if n < 1 or k < 1:
        raise ConfigError(f"identical_slots needs n, k >= 1, got n={n}, k={k}")
    if n > MAX_SLOT_VALUE:
        raise ConfigError(f"n={n} exceeds the slot domain")
    vectors = [(s,) * k for s in range(1, n + 1)]
    return enumeration_model(vectors, k, f"identical(n={n},k={k})")


def cross_product(m: int, j: int) -> Model:
    """All m*m concatenations of m disjoint-valued base vectors of length j."""
    if m < 1 or j < 1:
        raise ConfigError(f"cross_product needs m, j >= 1, got m={m}, j={j}")
    if m * j > MAX_SLOT_VALUE:
        raise ConfigError("cross_product value range exceeds the slot domain")
    base = [tuple(range((i - 1) * j + 1, i * j + 1)) for i in range(1, m + 1)]
    vectors = [a + b for a in base for b in base]
    return enumeration_model(vectors, 2 * j, f"cross(m={m},k={2 * j})")


def uniform_slots(r: int, k: int) -> Model:
    """All r**k vectors over slot values 1..r; k must be a power of two."""
    if r < 1 or k < 1:
        raise ConfigError(f"uniform_slots needs r, k >= 1, got r={r}, k={k}")
    if k & (k - 1):
        raise ConfigError(f"uniform_slots needs k a power of two, got {k}")
    count = r**k
    if count > 1 << 24:
        raise ConfigError(f"uniform_slots would enumerate {count} vectors; too many")
    vectors = [v for v in product(range(1, r + 1), repeat=k)]
    return enumeration_model(vectors, k, f"uniform(r={r},k={k})")


def symmetric_blocks(q: int, p: int, m: int) -> Model:
    """All q**p combinations of p blocks, each a repeated-slot vector of width m.

    The model carries a process layout of p equal blocks marked as one
    shared group, mirroring storage per process type.
    """
    if q < 1 or p < 1 or m < 1:
        raise ConfigError(f"symmetric_blocks needs q, p, m >= 1, got {q}, {p}, {m}")
    count = q**p
    if count > 1 << 24:
        raise ConfigError(f"symmetric_blocks would enumerate {count} vectors; too many")
    blocks = [(s,) * m for s in range(1, q + 1)]
    vectors = []
    for combo in product(blocks, repeat=p):
        flat: Vector = ()
        for b in combo:
            flat += b
        vectors.append(flat)
    return enumeration_model(
        vectors, p * m, f"symmetric(q={q},p={p},m={m})",
        process_layout=(m,) * p, layout_groups=(0,) * p,
    )


def generate_synthetic(spec: SyntheticSpec) -> Model:
    """Materialize the model for a parsed synthetic scenario."""
    p = spec.params
    kind = spec.kind
    if kind.startswith("identical"):
        model = identical_slots(p["n"], p["k"])
    elif kind.startswith("cross"):
        j = p.get("j", p.get("k", 0) // 2)
        if "k" in p and p["k"] % 2:
            raise ConfigError(f"cross_product needs an even k, got {p['k']}")
        model = cross_product(p["m"], j)
    elif kind.startswith("uniform"):
        model = uniform_slots(p["r"], p["k"])
    else:
        model = symmetric_blocks(p["q"], p["p"], p["m"])
    blocks = p.get("blocks")
    if blocks:
        if model.k % blocks:
            raise ConfigError(f"blocks={blocks} does not divide k={model.k}")
        model.process_layout = (model.k // blocks,) * blocks
    return model
