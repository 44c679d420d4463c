"""Adaptive vector memory store with selective consolidation and decay."""

from .config import (
    DEFAULT_PRUNE_THRESHOLD,
    PROFILES,
    MemoryConfig,
    load_config_file,
    profile,
    set_alpha_runtime,
    set_gamma_runtime,
    set_theta_runtime,
    validate,
)
from .engine import EagerReferenceStore, StepReport, prune, remembered_count, step
from .errors import (
    ArmError,
    BadMagic,
    CorruptRecord,
    DimensionMismatch,
    DuplicateId,
    EmptyInput,
    EmptyJudgment,
    EmptyStore,
    InvalidConfig,
    InvalidSpec,
    InvalidThreshold,
    InvalidValue,
    IoFailure,
    NonFiniteComponent,
    NotFound,
    ParseError,
    UnknownId,
    UnknownProfile,
    UnsupportedVersion,
    ValidationError,
)
from .metrics import (
    Judgment,
    aggregate,
    load_judgments,
    ndcg_at_k,
    precision_at_k,
    recall_at_k,
)
from .persistence import SNAPSHOT_MAGIC, SNAPSHOT_VERSION, ingest_jsonl, load, save
from .retrieval import RetrievalResult, query, top_k
from .store import MemoryItem, MemoryStore
from .telemetry import (
    LatencyRecord,
    StatsSnapshot,
    export_csv,
    snapshot,
    stabilization,
    summarize,
    timed_query,
)
from .workload import WorkloadSpec, dump_stream, generate, parse_workload

__version__ = "0.1.0"

__all__ = [
    "ArmError",
    "BadMagic",
    "CorruptRecord",
    "DEFAULT_PRUNE_THRESHOLD",
    "DimensionMismatch",
    "DuplicateId",
    "EagerReferenceStore",
    "EmptyInput",
    "EmptyJudgment",
    "EmptyStore",
    "InvalidConfig",
    "InvalidSpec",
    "InvalidThreshold",
    "InvalidValue",
    "IoFailure",
    "Judgment",
    "LatencyRecord",
    "MemoryConfig",
    "MemoryItem",
    "MemoryStore",
    "NonFiniteComponent",
    "NotFound",
    "PROFILES",
    "ParseError",
    "RetrievalResult",
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
    "StatsSnapshot",
    "StepReport",
    "UnknownId",
    "UnknownProfile",
    "UnsupportedVersion",
    "ValidationError",
    "WorkloadSpec",
    "aggregate",
    "dump_stream",
    "export_csv",
    "generate",
    "ingest_jsonl",
    "load",
    "load_config_file",
    "load_judgments",
    "ndcg_at_k",
    "parse_workload",
    "precision_at_k",
    "profile",
    "prune",
    "query",
    "recall_at_k",
    "remembered_count",
    "save",
    "set_alpha_runtime",
    "set_gamma_runtime",
    "set_theta_runtime",
    "snapshot",
    "stabilization",
    "step",
    "summarize",
    "timed_query",
    "top_k",
    "validate",
]
