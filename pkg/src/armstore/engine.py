"""Per-query update rules: access recording, promotion, decay, pruning.

``step`` is the lazy engine used in production: it advances the clock
and writes only the retrieved items (the O(k) contract), folding each
touched item's pending decay into its stored exponent first.

``EagerReferenceStore`` is the deliberately naive twin: it sweeps every
item each step and multiplies stale vectors in place. It exists as an
independent oracle; tests replay identical workloads through both and
require matching counts, flags, and strengths.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import MemoryConfig, validate
from .errors import (
    DimensionMismatch,
    DuplicateId,
    InvalidConfig,
    InvalidThreshold,
    InvalidValue,
    NonFiniteComponent,
    NotFound,
    UnknownId,
)
from .store import MemoryStore


@dataclass(frozen=True)
class StepReport:
    """What one query's update did."""

    step: int
    retrieved: list[str]
    promoted: list[str]
    touched_count: int
    materialized_decays: int


def _check_retrieved_ids(container, retrieved_ids) -> list[str]:
    ids = list(retrieved_ids)
    missing = [item_id for item_id in ids if item_id not in container]
    if missing:
        raise UnknownId(f"retrieved ids not in store: {missing}")
    if len(set(ids)) != len(ids):
        raise DuplicateId(f"retrieved ids contain duplicates: {ids}")
    return ids


def step(store: MemoryStore, retrieved_ids) -> StepReport:
    """Apply one query's remembrance update for the retrieved id set.

    The clock advances first. Each retrieved item has its decay events
    accrued strictly before the new step materialized (access halts
    further decay but never restores magnitude), then its access count
    bumped and its last-access time set; items reaching the remembrance
    threshold are promoted permanently. Items outside the retrieved set
    are not written, their decay stays pending.
    """
    ids = _check_retrieved_ids(store, retrieved_ids)
    t = store.advance_clock()
    theta = store.config.theta
    promoted: list[str] = []
    materialized = 0
    for item_id in ids:
        materialized += store.materialize_pending(item_id, t - 1)
        was_remembered = store.is_remembered(item_id)
        count = store.record_access(item_id)
        if not was_remembered and count >= theta:
            store.set_remembered(item_id)
            promoted.append(item_id)
    return StepReport(
        step=t,
        retrieved=ids,
        promoted=promoted,
        touched_count=len(ids),
        materialized_decays=materialized,
    )


def prune(store: MemoryStore, strength_threshold: float) -> list[str]:
    """Remove unremembered items whose strength fell below the threshold.

    Remembered items are never pruned. Returns removed ids ascending.
    """
    if not isinstance(strength_threshold, (int, float)) or isinstance(strength_threshold, bool):
        raise InvalidThreshold(f"threshold must be a real in [0,1), got {strength_threshold!r}")
    if not (0.0 <= strength_threshold < 1.0):
        raise InvalidThreshold(f"threshold must lie in [0,1), got {strength_threshold!r}")
    strengths = store.effective_strengths()
    mask = ~store.remembered_mask() & (strengths < strength_threshold)
    removed = sorted(item_id for item_id, dead in zip(store.row_ids(), mask) if dead)
    store.remove_many(removed)
    return removed


def remembered_count(store: MemoryStore) -> int:
    return store.remembered_total


class EagerReferenceStore:
    """O(N)-per-step reference: vectors mutated in place, no lazy state.

    Keeps a float64 copy of each vector and shrinks stale ones by alpha
    every step, exactly as the per-query procedure reads. A scalar
    strength per item tracks the same product of multiplications so
    strengths can be compared without dividing vectors.
    """

    def __init__(self, config: MemoryConfig):
        violations = validate(config)
        if violations:
            raise InvalidConfig("; ".join(violations))
        self.config = replace(config)
        self.clock = 0
        self._ids: list[str] = []
        self._index: dict[str, int] = {}
        self._vectors: list[np.ndarray] = []
        self._strength: list[float] = []
        self._count: list[int] = []
        self._last_access: list[int] = []
        self._remembered: list[bool] = []

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._index

    def insert(self, item_id: str, vector) -> None:
        if item_id in self._index:
            raise DuplicateId(f"id already present: {item_id!r}")
        vec = np.asarray(vector, dtype=np.float64)
        if self._vectors and vec.shape != self._vectors[0].shape:
            raise DimensionMismatch(f"vector for {item_id!r} has shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise NonFiniteComponent(f"vector for {item_id!r} has non-finite components")
        # match the lazy store's float32 quantization of stored components
        self._index[item_id] = len(self._ids)
        self._ids.append(item_id)
        self._vectors.append(vec.astype(np.float32).astype(np.float64))
        self._strength.append(1.0)
        self._count.append(0)
        self._last_access.append(self.clock)
        self._remembered.append(False)

    def step(self, retrieved_ids) -> StepReport:
        """Literal per-query sweep: update the retrieved set, then decay all."""
        ids = _check_retrieved_ids(self._index, retrieved_ids)
        self.clock += 1
        t = self.clock
        theta = self.config.theta
        promoted: list[str] = []
        for item_id in ids:
            row = self._index[item_id]
            self._count[row] += 1
            self._last_access[row] = t
            if not self._remembered[row] and self._count[row] >= theta:
                self._remembered[row] = True
                promoted.append(item_id)
        gamma = self.config.gamma
        alpha = self.config.alpha
        decays = 0
        for row in range(len(self._ids)):
            if not self._remembered[row] and t - self._last_access[row] > gamma:
                self._vectors[row] *= alpha
                self._strength[row] *= alpha
                decays += 1
        return StepReport(
            step=t,
            retrieved=ids,
            promoted=promoted,
            touched_count=len(ids) + decays,
            materialized_decays=decays,
        )

    def top_k_ids(self, query, k: int) -> list[str]:
        q = np.asarray(query, dtype=np.float64)
        scores = [float(np.dot(vec, q)) for vec in self._vectors]
        order = sorted(range(len(self._ids)), key=lambda i: (-scores[i], self._ids[i]))
        return [self._ids[i] for i in order[: min(k, len(order))]]

    def prune(self, strength_threshold: float) -> list[str]:
        if not (0.0 <= strength_threshold < 1.0):
            raise InvalidThreshold(f"threshold must lie in [0,1), got {strength_threshold!r}")
        removed = sorted(
            item_id
            for item_id, row in self._index.items()
            if not self._remembered[row] and self._strength[row] < strength_threshold
        )
        for item_id in removed:
            self._drop(item_id)
        return removed

    def set_alpha(self, new_alpha: float) -> None:
        if not (0.0 < new_alpha < 1.0):
            raise InvalidValue(f"alpha must lie strictly in (0,1), got {new_alpha!r}")
        self.config.alpha = float(new_alpha)

    def set_gamma(self, new_gamma: int) -> None:
        if not isinstance(new_gamma, int) or new_gamma < 0:
            raise InvalidValue(f"gamma must be an integer >= 0, got {new_gamma!r}")
        self.config.gamma = new_gamma

    def set_theta(self, new_theta: int) -> None:
        if not isinstance(new_theta, int) or new_theta < 1:
            raise InvalidValue(f"theta must be an integer >= 1, got {new_theta!r}")
        self.config.theta = new_theta

    # -- observables compared against the lazy engine ----------------------

    def access_count(self, item_id: str) -> int:
        return self._count[self._require(item_id)]

    def last_access_step(self, item_id: str) -> int:
        return self._last_access[self._require(item_id)]

    def remembered(self, item_id: str) -> bool:
        return self._remembered[self._require(item_id)]

    def effective_strength(self, item_id: str) -> float:
        return self._strength[self._require(item_id)]

    def effective_vector(self, item_id: str) -> np.ndarray:
        return self._vectors[self._require(item_id)].copy()

    def ids(self) -> list[str]:
        return sorted(self._ids)

    def remembered_count(self) -> int:
        return sum(self._remembered)

    def _require(self, item_id: str) -> int:
        row = self._index.get(item_id)
        if row is None:
            raise NotFound(f"no item with id {item_id!r}")
        return row

    def _drop(self, item_id: str) -> None:
        row = self._index.pop(item_id)
        last = len(self._ids) - 1
        if row != last:
            self._ids[row] = self._ids[last]
            self._vectors[row] = self._vectors[last]
            self._strength[row] = self._strength[last]
            self._count[row] = self._count[last]
            self._last_access[row] = self._last_access[last]
            self._remembered[row] = self._remembered[last]
            self._index[self._ids[row]] = row
        self._ids.pop()
        self._vectors.pop()
        self._strength.pop()
        self._count.pop()
        self._last_access.pop()
        self._remembered.pop()
