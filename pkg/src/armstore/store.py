"""Per-item memory state and the logical clock.

``MemoryStore`` keeps immutable base vectors (float32 rows of a dense
matrix) plus integer usage state per item. Decay is never baked into the
vectors: each item carries a count of materialized decay events and a
float multiplier (only non-1.0 after a runtime alpha change), and the
effective strength at logical time ``now`` is

    multiplier * alpha ** (decay_exponent + pending_decays(now))

where pending decay events are counted lazily from ``last_access_step``
and ``materialized_at_step`` instead of being applied eagerly every
step. Reads are pure given (store, now); scores accumulate in float64.

Concurrency contract: many concurrent readers or one writer. All state
lives in plain arrays and dicts, so a store can be handed between
threads as long as writes are serialized by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MemoryConfig, validate
from .errors import (
    DimensionMismatch,
    DuplicateId,
    InvalidConfig,
    InvalidValue,
    NonFiniteComponent,
    NotFound,
)

MAX_ID_BYTES = 256

_INITIAL_CAPACITY = 16


def _check_id(item_id: str) -> None:
    if not isinstance(item_id, str) or not item_id:
        raise InvalidValue(f"item id must be a non-empty string, got {item_id!r}")
    if len(item_id.encode("utf-8")) > MAX_ID_BYTES:
        raise InvalidValue(f"item id exceeds {MAX_ID_BYTES} UTF-8 bytes: {item_id[:32]!r}...")


@dataclass(frozen=True, eq=False)
class MemoryItem:
    """Read-only view of one item's stored state."""

    id: str
    base_vector: np.ndarray
    access_count: int
    last_access_step: int
    remembered: bool
    decay_exponent: int
    materialized_at_step: int
    strength_multiplier: float

    def __eq__(self, other) -> bool:
        if not isinstance(other, MemoryItem):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.base_vector, other.base_vector)
            and self.access_count == other.access_count
            and self.last_access_step == other.last_access_step
            and self.remembered == other.remembered
            and self.decay_exponent == other.decay_exponent
            and self.materialized_at_step == other.materialized_at_step
            and self.strength_multiplier == other.strength_multiplier
        )

    __hash__ = None


class MemoryStore:
    """Id-keyed collection of memory items sharing one dimension and clock."""

    def __init__(self, config: MemoryConfig):
        violations = validate(config)
        if violations:
            raise InvalidConfig("; ".join(violations))
        self._config = config
        self._dimension = config.dimension
        self._clock = 0
        self._n = 0
        self._n_remembered = 0
        cap = _INITIAL_CAPACITY
        self._vectors = np.zeros((cap, self._dimension), dtype=np.float32)
        self._norms = np.zeros(cap, dtype=np.float64)
        self._access_count = np.zeros(cap, dtype=np.int64)
        self._last_access = np.zeros(cap, dtype=np.int64)
        self._remembered = np.zeros(cap, dtype=bool)
        self._exponent = np.zeros(cap, dtype=np.int64)
        self._materialized_at = np.zeros(cap, dtype=np.int64)
        self._multiplier = np.ones(cap, dtype=np.float64)
        self._row_ids: list[str] = []
        self._index: dict[str, int] = {}
        self._retired: set[str] = set()

    # -- basic container surface ------------------------------------------

    @property
    def config(self) -> MemoryConfig:
        return self._config

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def clock(self) -> int:
        return self._clock

    def advance_clock(self) -> int:
        """Tick the logical clock by one query and return the new time."""
        self._clock += 1
        return self._clock

    def __len__(self) -> int:
        return self._n

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._index

    def ids(self) -> list[str]:
        """All item ids, sorted ascending."""
        return sorted(self._index)

    def row_ids(self) -> list[str]:
        """Item ids in internal row order (retrieval pairs these with scores)."""
        return self._row_ids

    def insert(self, item_id: str, vector) -> None:
        _check_id(item_id)
        if item_id in self._index:
            raise DuplicateId(f"id already present: {item_id!r}")
        if item_id in self._retired:
            raise DuplicateId(f"id was removed earlier this session and cannot be reused: {item_id!r}")
        vec = np.asarray(vector, dtype=np.float64)
        if vec.shape != (self._dimension,):
            raise DimensionMismatch(
                f"vector for {item_id!r} has shape {vec.shape}, store dimension is {self._dimension}"
            )
        if not np.all(np.isfinite(vec)):
            raise NonFiniteComponent(f"vector for {item_id!r} has non-finite components")
        with np.errstate(over="ignore"):
            vec32 = vec.astype(np.float32)
        if not np.all(np.isfinite(vec32)):
            raise NonFiniteComponent(f"vector for {item_id!r} overflows float32 storage")
        row = self._n
        if row >= len(self._vectors):
            self._grow_if_needed(row + 1)
        self._vectors[row] = vec32
        self._norms[row] = float(np.linalg.norm(vec32.astype(np.float64)))
        self._access_count[row] = 0
        self._last_access[row] = self._clock
        self._remembered[row] = False
        self._exponent[row] = 0
        self._materialized_at[row] = self._clock
        self._multiplier[row] = 1.0
        self._row_ids.append(item_id)
        self._index[item_id] = row
        self._n += 1

    def get(self, item_id: str) -> MemoryItem:
        row = self._index.get(item_id)
        if row is None:
            raise NotFound(f"no item with id {item_id!r}")
        return self._view(row)

    def remove(self, item_id: str) -> MemoryItem:
        row = self._index.get(item_id)
        if row is None:
            raise NotFound(f"no item with id {item_id!r}")
        view = self._view(row)
        self._drop_row(row)
        return view

    def remove_many(self, item_ids) -> None:
        """Remove a batch of ids; every id must be present."""
        for item_id in item_ids:
            self.remove(item_id)

    # -- lazy decay arithmetic --------------------------------------------

    def pending_decays(self, item_id: str, now: int | None = None) -> int:
        """Decay events accrued since materialization, counted lazily.

        Zero for remembered items. Otherwise counts the steps ``s`` in
        (materialized_at, now] with ``s - last_access > gamma``.
        """
        row = self._require_row(item_id)
        return self._pending_row(row, self._clock if now is None else now)

    def effective_strength(self, item_id: str, now: int | None = None) -> float:
        row = self._require_row(item_id)
        t = self._clock if now is None else now
        total = int(self._exponent[row]) + self._pending_row(row, t)
        return float(self._multiplier[row]) * self._config.alpha ** total

    def effective_vector(self, item_id: str, now: int | None = None) -> np.ndarray:
        """Base vector scaled by the effective strength; float64, never a view."""
        row = self._require_row(item_id)
        strength = self.effective_strength(item_id, now)
        return self._vectors[row].astype(np.float64) * strength

    def effective_strengths(self, now: int | None = None) -> np.ndarray:
        """Strengths for every item in row order (float64, vectorized)."""
        t = self._clock if now is None else now
        n = self._n
        gamma = self._config.gamma
        pending = np.maximum(
            0, t - np.maximum(self._materialized_at[:n], self._last_access[:n] + gamma)
        )
        pending[self._remembered[:n]] = 0
        return self._multiplier[:n] * np.power(self._config.alpha, self._exponent[:n] + pending)

    def base_matrix(self) -> np.ndarray:
        """Float32 matrix of base vectors in row order (do not mutate)."""
        return self._vectors[: self._n]

    def base_norms(self) -> np.ndarray:
        """Cached float64 l2 norms of the base vectors in row order."""
        return self._norms[: self._n]

    def remembered_mask(self) -> np.ndarray:
        return self._remembered[: self._n]

    @property
    def remembered_total(self) -> int:
        return self._n_remembered

    # -- write primitives used by the remembrance engine -------------------

    def materialize_pending(self, item_id: str, upto: int) -> int:
        """Fold decay events up to step ``upto`` into the stored exponent.

        Returns the number of events folded; no-op for remembered items.
        """
        row = self._require_row(item_id)
        if self._remembered[row]:
            return 0
        pending = self._pending_row(row, upto)
        if pending:
            self._exponent[row] += pending
        self._materialized_at[row] = max(int(self._materialized_at[row]), upto)
        return pending

    def record_access(self, item_id: str) -> int:
        """Count one retrieval at the current clock; returns the new count."""
        row = self._require_row(item_id)
        self._access_count[row] += 1
        self._last_access[row] = self._clock
        self._materialized_at[row] = self._clock
        return int(self._access_count[row])

    def is_remembered(self, item_id: str) -> bool:
        return bool(self._remembered[self._require_row(item_id)])

    def set_remembered(self, item_id: str) -> None:
        row = self._require_row(item_id)
        if not self._remembered[row]:
            self._remembered[row] = True
            self._n_remembered += 1

    # -- snapshot restore hooks ---------------------------------------------

    def restore_clock(self, clock: int) -> None:
        """Set the logical clock directly (snapshot load only)."""
        if not isinstance(clock, int) or clock < 0:
            raise InvalidValue(f"clock must be a non-negative integer, got {clock!r}")
        self._clock = clock

    def restore_item_state(
        self,
        item_id: str,
        *,
        access_count: int,
        last_access_step: int,
        remembered: bool,
        decay_exponent: int,
        materialized_at_step: int,
        strength_multiplier: float,
    ) -> None:
        """Overwrite one item's usage state (snapshot load only)."""
        row = self._require_row(item_id)
        self._access_count[row] = access_count
        self._last_access[row] = last_access_step
        if remembered and not self._remembered[row]:
            self._n_remembered += 1
        elif not remembered and self._remembered[row]:
            self._n_remembered -= 1
        self._remembered[row] = remembered
        self._exponent[row] = decay_exponent
        self._materialized_at[row] = materialized_at_step
        self._multiplier[row] = strength_multiplier

    # -- runtime reconfiguration hooks -------------------------------------

    def materialize_all_pending(self) -> None:
        """Fold every item's pending decay (at the current clock) into exponents."""
        n = self._n
        if n == 0:
            return
        gamma = self._config.gamma
        pending = np.maximum(
            0,
            self._clock - np.maximum(self._materialized_at[:n], self._last_access[:n] + gamma),
        )
        pending[self._remembered[:n]] = 0
        self._exponent[:n] += pending
        self._materialized_at[:n] = np.maximum(self._materialized_at[:n], self._clock)

    def collapse_strengths_to_multiplier(self) -> None:
        """Bake current strengths into the float multiplier and zero exponents.

        Called before the decay rate changes: strengths accrued under the
        old alpha are preserved exactly as a product of per-phase powers.
        """
        self.materialize_all_pending()
        n = self._n
        if n == 0:
            return
        self._multiplier[:n] *= np.power(self._config.alpha, self._exponent[:n])
        self._exponent[:n] = 0

    # -- internals ----------------------------------------------------------

    def _pending_row(self, row: int, now: int) -> int:
        if self._remembered[row]:
            return 0
        start = max(int(self._materialized_at[row]), int(self._last_access[row]) + self._config.gamma)
        return max(0, now - start)

    def _require_row(self, item_id: str) -> int:
        row = self._index.get(item_id)
        if row is None:
            raise NotFound(f"no item with id {item_id!r}")
        return row

    def _view(self, row: int) -> MemoryItem:
        return MemoryItem(
            id=self._row_ids[row],
            base_vector=self._vectors[row].copy(),
            access_count=int(self._access_count[row]),
            last_access_step=int(self._last_access[row]),
            remembered=bool(self._remembered[row]),
            decay_exponent=int(self._exponent[row]),
            materialized_at_step=int(self._materialized_at[row]),
            strength_multiplier=float(self._multiplier[row]),
        )

    def _drop_row(self, row: int) -> None:
        item_id = self._row_ids[row]
        if self._remembered[row]:
            self._n_remembered -= 1
        last = self._n - 1
        if row != last:
            self._vectors[row] = self._vectors[last]
            self._norms[row] = self._norms[last]
            self._access_count[row] = self._access_count[last]
            self._last_access[row] = self._last_access[last]
            self._remembered[row] = self._remembered[last]
            self._exponent[row] = self._exponent[last]
            self._materialized_at[row] = self._materialized_at[last]
            self._multiplier[row] = self._multiplier[last]
            moved = self._row_ids[last]
            self._row_ids[row] = moved
            self._index[moved] = row
        self._row_ids.pop()
        del self._index[item_id]
        self._retired.add(item_id)
        self._n = last

    def _grow_if_needed(self, needed: int) -> None:
        cap = len(self._vectors)
        if needed <= cap:
            return
        new_cap = max(needed, cap * 2)
        vectors = np.zeros((new_cap, self._dimension), dtype=np.float32)
        vectors[:cap] = self._vectors
        self._vectors = vectors
        for name in (
            "_norms",
            "_access_count",
            "_last_access",
            "_remembered",
            "_exponent",
            "_materialized_at",
            "_multiplier",
        ):
            old = getattr(self, name)
            new = np.zeros(new_cap, dtype=old.dtype)
            new[:cap] = old
            setattr(self, name, new)
        self._multiplier[cap:] = 1.0
