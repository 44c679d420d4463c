"""Binary store snapshots and JSON Lines embedding ingestion.

Snapshot layout, all integers little-endian:

    header (50 bytes)
        magic             4s   b"ARM1"
        version           u16  currently 1
        dimension         u32
        item_count        u64
        clock             u64
        theta             u32
        gamma             u32
        alpha             f64
        prune_threshold   f64
    item record, repeated item_count times, sorted by id
        id_length         u16
        id                UTF-8 bytes
        base_vector       dimension x f32
        access_count      u64
        last_access_step  u64
        remembered        u8 (0 or 1)
        decay_exponent    u64
        materialized_at   u64
        strength_mult     f64

Records are sorted by id and carry no timestamps, so two saves of the
same store are byte-identical. Writes go through a temp file and an
atomic rename.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .config import MemoryConfig, validate
from .errors import (
    BadMagic,
    CorruptRecord,
    DimensionMismatch,
    InvalidConfig,
    IoFailure,
    NonFiniteComponent,
    ParseError,
    UnsupportedVersion,
)
from .store import MemoryStore

SNAPSHOT_MAGIC = b"ARM1"
SNAPSHOT_VERSION = 1

_HEADER = struct.Struct("<4sHIQQIIdd")
_ITEM_FIXED = struct.Struct("<QQBQQd")
_ID_LEN = struct.Struct("<H")


def save(store: MemoryStore, path) -> None:
    """Write a deterministic snapshot of the full store state."""
    cfg = store.config
    parts = [
        _HEADER.pack(
            SNAPSHOT_MAGIC,
            SNAPSHOT_VERSION,
            store.dimension,
            len(store),
            store.clock,
            cfg.theta,
            cfg.gamma,
            cfg.alpha,
            cfg.prune_threshold,
        )
    ]
    for item_id in store.ids():
        item = store.get(item_id)
        id_bytes = item_id.encode("utf-8")
        parts.append(_ID_LEN.pack(len(id_bytes)))
        parts.append(id_bytes)
        parts.append(item.base_vector.astype("<f4").tobytes())
        parts.append(
            _ITEM_FIXED.pack(
                item.access_count,
                item.last_access_step,
                1 if item.remembered else 0,
                item.decay_exponent,
                item.materialized_at_step,
                item.strength_multiplier,
            )
        )
    blob = b"".join(parts)
    path = str(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".armstore-", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write snapshot {path}: {exc}") from exc


class _Cursor:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.offset = 0

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.blob):
            raise CorruptRecord(
                f"snapshot truncated: needed {size} bytes at offset {self.offset}, "
                f"file has {len(self.blob)}"
            )
        chunk = self.blob[self.offset : end]
        self.offset = end
        return chunk

    def unpack(self, spec: struct.Struct):
        return spec.unpack(self.take(spec.size))


def load(path) -> MemoryStore:
    """Reconstruct a store from a snapshot, validating as it goes."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read snapshot {path}: {exc}") from exc
    cursor = _Cursor(blob)
    magic, version, dimension, item_count, clock, theta, gamma, alpha, prune = cursor.unpack(
        _HEADER
    )
    if magic != SNAPSHOT_MAGIC:
        raise BadMagic(f"bad snapshot magic {magic!r} in {path}")
    if version != SNAPSHOT_VERSION:
        raise UnsupportedVersion(f"snapshot version {version} not supported (expect {SNAPSHOT_VERSION})")
    config = MemoryConfig(
        theta=int(theta),
        gamma=int(gamma),
        alpha=float(alpha),
        prune_threshold=float(prune),
        dimension=int(dimension),
    )
    violations = validate(config)
    if violations:
        raise InvalidConfig(f"snapshot config invalid: {'; '.join(violations)}")
    store = MemoryStore(config)
    store.restore_clock(int(clock))
    for _ in range(item_count):
        record_offset = cursor.offset
        (id_len,) = cursor.unpack(_ID_LEN)
        try:
            item_id = cursor.take(id_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptRecord(f"bad id bytes at offset {record_offset}: {exc}") from exc
        vector = np.frombuffer(cursor.take(4 * dimension), dtype="<f4").astype(np.float32)
        count, last_access, remembered_byte, exponent, materialized_at, multiplier = (
            cursor.unpack(_ITEM_FIXED)
        )
        if remembered_byte not in (0, 1):
            raise CorruptRecord(
                f"remembered flag must be 0 or 1 at offset {record_offset}, got {remembered_byte}"
            )
        if last_access > clock or materialized_at > clock:
            raise CorruptRecord(
                f"item {item_id!r} at offset {record_offset} references steps beyond the clock"
            )
        if not (0.0 < multiplier <= 1.0):
            raise CorruptRecord(
                f"item {item_id!r} at offset {record_offset} has strength multiplier {multiplier!r}"
            )
        if not np.all(np.isfinite(vector)):
            raise CorruptRecord(
                f"item {item_id!r} at offset {record_offset} has non-finite components"
            )
        store.insert(item_id, vector)
        store.restore_item_state(
            item_id,
            access_count=count,
            last_access_step=last_access,
            remembered=bool(remembered_byte),
            decay_exponent=exponent,
            materialized_at_step=materialized_at,
            strength_multiplier=multiplier,
        )
    if cursor.offset != len(blob):
        raise CorruptRecord(
            f"trailing data after {item_count} records at offset {cursor.offset}"
        )
    return store


def ingest_jsonl(path, normalize: bool = False) -> list[tuple[str, np.ndarray]]:
    """Parse embeddings from JSON Lines: {"id": str, "vector": [floats]}.

    Dimension is fixed by the first record; with ``normalize`` each
    vector is scaled to unit l2 norm.
    """
    pairs: list[tuple[str, np.ndarray]] = []
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                item_id = raw["id"]
                vector = raw["vector"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad embedding record: {exc}") from exc
            if not isinstance(item_id, str) or not isinstance(vector, list):
                raise ParseError(f"{path}:{lineno}: expected string id and list vector")
            try:
                vec = np.asarray(vector, dtype=np.float64)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: vector is not numeric: {exc}") from exc
            if vec.ndim != 1 or vec.size == 0:
                raise ParseError(f"{path}:{lineno}: vector must be a non-empty flat list")
            if dimension is None:
                dimension = vec.size
            elif vec.size != dimension:
                raise DimensionMismatch(
                    f"{path}:{lineno}: vector has dimension {vec.size}, expected {dimension}"
                )
            if not np.all(np.isfinite(vec)):
                raise NonFiniteComponent(f"{path}:{lineno}: non-finite vector component")
            if normalize:
                norm = float(np.linalg.norm(vec))
                if norm == 0.0:
                    raise NonFiniteComponent(f"{path}:{lineno}: cannot normalize a zero vector")
                vec = vec / norm
            pairs.append((item_id, vec))
    return pairs
