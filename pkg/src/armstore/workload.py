"""Deterministic synthetic query streams: uniform, Zipfian, drifting.

Targets are drawn over a fixed popularity ranking (ascending item id is
rank 1) so runs are auditable; Zipf sampling uses the exact inverse CDF
of the finite normalized distribution. Queries are the target's base
vector plus optional spherical Gaussian noise, and the whole stream is
reproducible byte for byte from a WorkloadSpec and its seed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import EmptyStore, InvalidSpec

KINDS = ("uniform", "zipf", "drift")


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str
    n_steps: int
    seed: int
    s: float | None = None
    switch_step: int | None = None
    noise_sigma: float = 0.0


def _validate_spec(spec: WorkloadSpec) -> None:
    if spec.kind not in KINDS:
        raise InvalidSpec(f"unknown workload kind {spec.kind!r}; choose from {KINDS}")
    if not isinstance(spec.n_steps, int) or spec.n_steps < 1:
        raise InvalidSpec(f"n_steps must be a positive integer, got {spec.n_steps!r}")
    if spec.noise_sigma < 0:
        raise InvalidSpec(f"noise_sigma must be non-negative, got {spec.noise_sigma!r}")
    if spec.kind in ("zipf", "drift"):
        if spec.s is None or not spec.s > 0:
            raise InvalidSpec(f"zipf exponent s must be > 0, got {spec.s!r}")
    if spec.kind == "drift":
        if (
            spec.switch_step is None
            or not isinstance(spec.switch_step, int)
            or not (0 <= spec.switch_step < spec.n_steps)
        ):
            raise InvalidSpec(
                f"switch_step must satisfy 0 <= switch_step < n_steps, got {spec.switch_step!r}"
            )


def parse_workload(text: str, n_steps: int, noise_sigma: float, seed: int) -> WorkloadSpec:
    """Parse the CLI form: ``uniform``, ``zipf:S`` or ``drift:S:SWITCH``."""
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "uniform" and len(parts) == 1:
            return WorkloadSpec("uniform", n_steps, seed, noise_sigma=noise_sigma)
        if kind == "zipf" and len(parts) == 2:
            return WorkloadSpec("zipf", n_steps, seed, s=float(parts[1]), noise_sigma=noise_sigma)
        if kind == "drift" and len(parts) == 3:
            return WorkloadSpec(
                "drift",
                n_steps,
                seed,
                s=float(parts[1]),
                switch_step=int(parts[2]),
                noise_sigma=noise_sigma,
            )
    except ValueError as exc:
        raise InvalidSpec(f"bad workload parameters in {text!r}: {exc}") from exc
    raise InvalidSpec(
        f"bad workload {text!r}; expected uniform, zipf:S or drift:S:SWITCH"
    )


def _probabilities(spec: WorkloadSpec, n: int) -> np.ndarray:
    if spec.kind == "uniform":
        return np.full(n, 1.0 / n)
    weights = 1.0 / np.power(np.arange(1, n + 1, dtype=np.float64), spec.s)
    return weights / weights.sum()


def generate(
    spec: WorkloadSpec, store_ids, base_vectors
) -> Iterator[tuple[int, str, np.ndarray]]:
    """Yield (step, target_id, query_vector) for steps 1..n_steps.

    ``store_ids`` and ``base_vectors`` must be aligned; the popularity
    ranking sorts ids ascending. For drift workloads the first
    ``switch_step`` steps use that ranking, after which the head and
    tail halves swap places (the extra middle item of an odd-sized
    corpus stays with the tail half).
    """
    _validate_spec(spec)
    ids = list(store_ids)
    if not ids:
        raise EmptyStore("cannot generate a workload over an empty store")
    if len(ids) != len(base_vectors):
        raise InvalidSpec("store_ids and base_vectors must be aligned")
    by_id = dict(zip(ids, [np.asarray(v, dtype=np.float64) for v in base_vectors]))
    ranking = sorted(ids)
    n = len(ranking)
    cdf = np.cumsum(_probabilities(spec, n))
    cdf[-1] = 1.0
    swapped = ranking[n // 2 :] + ranking[: n // 2]
    rng = np.random.default_rng(spec.seed)
    for step_index in range(1, spec.n_steps + 1):
        active = ranking
        if spec.kind == "drift" and step_index > spec.switch_step:
            active = swapped
        rank = int(np.searchsorted(cdf, rng.random(), side="right"))
        target_id = active[min(rank, n - 1)]
        query = by_id[target_id]
        if spec.noise_sigma > 0:
            query = query + rng.normal(0.0, spec.noise_sigma, size=query.shape)
        yield step_index, target_id, query


def dump_stream(stream, path, seed: int) -> None:
    """Write the target sequence as CSV plus a JSON sidecar with the seed."""
    path = str(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "target_id"])
        for step_index, target_id, _query in stream:
            writer.writerow([step_index, target_id])
    with open(path + ".seed.json", "w", encoding="utf-8") as fh:
        json.dump({"seed": seed}, fh)
        fh.write("\n")
