"""Run statistics and CSV export.

``snapshot`` is a pure read: norms come from effective vectors, so the
numbers reflect pending decay without forcing any materialization.
Latency is captured with the monotonic clock and reported in
microseconds per step plus p50/p99 aggregates in the run summary.
"""

from __future__ import annotations

import csv
import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from . import engine, retrieval
from .errors import IoFailure
from .store import MemoryStore


@dataclass(frozen=True)
class StatsSnapshot:
    """One telemetry row for a store at a given step."""

    step: int
    item_count: int
    remembered_count: int
    remembered_fraction: float
    stale_norm_sum: float
    mean_strength: float
    nonzero_embeddings: int


@dataclass(frozen=True)
class LatencyRecord:
    step: int
    retrieval_micros: float
    update_micros: float
    touched_count: int


def snapshot(store: MemoryStore) -> StatsSnapshot:
    """Collect the telemetry row for the store's current clock."""
    n = len(store)
    if n == 0:
        return StatsSnapshot(
            step=store.clock,
            item_count=0,
            remembered_count=0,
            remembered_fraction=0.0,
            stale_norm_sum=0.0,
            mean_strength=1.0,
            nonzero_embeddings=0,
        )
    strengths = store.effective_strengths()
    remembered = store.remembered_mask()
    stale = float(np.sum(strengths[~remembered] * store.base_norms()[~remembered]))
    return StatsSnapshot(
        step=store.clock,
        item_count=n,
        remembered_count=store.remembered_total,
        remembered_fraction=store.remembered_total / n,
        stale_norm_sum=stale,
        mean_strength=float(strengths.mean()),
        nonzero_embeddings=int(np.sum(strengths > store.config.prune_threshold)),
    )


def _format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def export_csv(records, path, record_type=None) -> None:
    """Write snapshots or latency records as CSV, fields in declared order.

    ``record_type`` picks the header for an empty series; otherwise it
    is inferred from the first record.
    """
    records = list(records)
    if record_type is None:
        if not records:
            raise ValueError("record_type is required for an empty series")
        record_type = type(records[0])
    names = [f.name for f in dataclasses.fields(record_type)]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            for record in records:
                writer.writerow([_format_value(getattr(record, name)) for name in names])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def timed_query(store: MemoryStore, query_vec, k: int):
    """Run one retrieve-then-update step, timing the two phases.

    Returns (RetrievalResult, StepReport, LatencyRecord).
    """
    t0 = time.perf_counter_ns()
    result = retrieval.top_k(store, query_vec, k)
    t1 = time.perf_counter_ns()
    report = engine.step(store, result.ids())
    t2 = time.perf_counter_ns()
    record = LatencyRecord(
        step=report.step,
        retrieval_micros=(t1 - t0) / 1000.0,
        update_micros=(t2 - t1) / 1000.0,
        touched_count=report.touched_count,
    )
    return result, report, record


def summarize(store: MemoryStore, latencies) -> dict:
    """Run summary: step count, update-latency percentiles, final state."""
    micros = [rec.update_micros for rec in latencies]
    return {
        "steps": store.clock,
        "p50_update_micros": float(np.percentile(micros, 50)) if micros else 0.0,
        "p99_update_micros": float(np.percentile(micros, 99)) if micros else 0.0,
        "final_remembered_fraction": snapshot(store).remembered_fraction,
        "final_item_count": len(store),
    }


def stabilization(remembered_counts, window_fraction: float = 0.2) -> dict:
    """Check the memory-dynamics property on a remembered-count series.

    Passes when the series never decreases and is constant over the
    final ``window_fraction`` of steps. An empty series passes vacuously.
    """
    counts = list(remembered_counts)
    non_decreasing = all(b >= a for a, b in zip(counts, counts[1:]))
    if counts:
        window = max(1, int(len(counts) * window_fraction))
        tail = counts[-window:]
        constant_tail = all(value == tail[-1] for value in tail)
    else:
        constant_tail = True
    return {
        "non_decreasing": non_decreasing,
        "constant_tail": constant_tail,
        "passed": non_decreasing and constant_tail,
    }
