"""Exact top-k scoring over effective vectors, and the fused query step.

Scores are dot products of the query with each item's effective
(decayed) vector: dot(query, base) * strength. Cosine similarity alone
would ignore magnitude and make decay invisible to ranking, so the dot
contract is the default; ingest with L2 normalization to read scores as
cosine * strength instead. Scanning is exhaustive and deterministic:
score descending, ties broken by ascending id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import StepReport
from .errors import DimensionMismatch, InvalidValue, NonFiniteComponent
from .store import MemoryStore


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked (id, score) entries for one query at logical time ``step``."""

    entries: list[tuple[str, float]]
    step: int

    def ids(self) -> list[str]:
        return [item_id for item_id, _ in self.entries]


def _check_query(store: MemoryStore, query, k: int) -> np.ndarray:
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise InvalidValue(f"k must be a positive integer, got {k!r}")
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (store.dimension,):
        raise DimensionMismatch(
            f"query has shape {q.shape}, store dimension is {store.dimension}"
        )
    if not np.all(np.isfinite(q)):
        raise NonFiniteComponent("query has non-finite components")
    return q


def _select_top(scores: np.ndarray, row_ids: list[str], k: int) -> list[int]:
    """Indices of the k best scores, ties broken by ascending id."""
    n = len(scores)
    k = min(k, n)
    if k == 0:
        return []
    if k < n:
        # partition, then widen to every row tied with the kth score
        part = np.argpartition(scores, n - k)
        kth_score = scores[part[n - k]]
        candidates = np.flatnonzero(scores >= kth_score)
    else:
        candidates = np.arange(n)
    ranked = sorted(candidates, key=lambda i: (-scores[i], row_ids[i]))
    return [int(i) for i in ranked[:k]]


def top_k(store: MemoryStore, query, k: int) -> RetrievalResult:
    """Score every item and return the k best without mutating the store.

    An empty store yields an empty result; k larger than the store size
    returns everything, ranked.
    """
    q = _check_query(store, query, k)
    if len(store) == 0:
        return RetrievalResult(entries=[], step=store.clock)
    scores = store.base_matrix() @ q
    scores = scores * store.effective_strengths()
    row_ids = store.row_ids()
    chosen = _select_top(scores, row_ids, k)
    entries = [(row_ids[i], float(scores[i])) for i in chosen]
    return RetrievalResult(entries=entries, step=store.clock)


def query(store: MemoryStore, query_vec, k: int) -> tuple[RetrievalResult, StepReport]:
    """Retrieve, then apply the remembrance update; one clock tick per call."""
    result = top_k(store, query_vec, k)
    report = engine.step(store, result.ids())
    return result, report
