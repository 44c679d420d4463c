"""Operator command line: ingest, query, simulate, bench, stats, prune, set.

Machine-readable JSON goes to stdout, human diagnostics to stderr.
Exit codes: 0 success, 1 runtime failure, 2 rejected input. The env
var ARM_SEED overrides the default workload seed (flags win over both).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import engine, retrieval, telemetry, workload
from .config import (
    MemoryConfig,
    load_config_file,
    profile,
    set_alpha_runtime,
    set_gamma_runtime,
    set_theta_runtime,
    validate,
)
from .errors import ArmError, InvalidConfig, InvalidValue, ParseError, ValidationError
from .metrics import aggregate, load_judgments, ndcg_at_k, precision_at_k, recall_at_k
from .persistence import ingest_jsonl, load, save
from .store import MemoryStore

DEFAULT_SEED = 42

METRIC_FUNCS = {
    "ndcg": ndcg_at_k,
    "precision": precision_at_k,
    "recall": recall_at_k,
}


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(payload: dict) -> None:
    print(json.dumps(payload))


def _resolve_seed(flag_value) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("ARM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise InvalidValue(f"ARM_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def _parse_vector(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise InvalidValue(f"bad vector {text!r}: {exc}") from exc


def _build_config(args, dimension: int) -> MemoryConfig:
    overrides = {
        "theta": getattr(args, "theta", None),
        "gamma": getattr(args, "gamma", None),
        "alpha": getattr(args, "alpha", None),
        "prune_threshold": getattr(args, "prune_threshold", None),
    }
    if getattr(args, "config", None):
        cfg = load_config_file(args.config, dimension=dimension, **overrides)
        if cfg.dimension != dimension:
            raise InvalidConfig(
                f"config dimension {cfg.dimension} does not match data dimension {dimension}"
            )
    else:
        cfg = profile(args.profile, dimension)
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
    violations = validate(cfg)
    if violations:
        raise InvalidConfig("; ".join(violations))
    return cfg


def cmd_ingest(args) -> int:
    pairs = ingest_jsonl(args.input, normalize=args.normalize)
    if not pairs:
        raise InvalidValue(f"no embedding records in {args.input}")
    dimension = int(pairs[0][1].size)
    config = _build_config(args, dimension)
    store = MemoryStore(config)
    for item_id, vector in pairs:
        store.insert(item_id, vector)
    save(store, args.out)
    _info(f"ingested {len(store)} items (d={dimension})")
    _emit({"items": len(store), "dimension": dimension, "snapshot": str(args.out)})
    return 0


def cmd_query(args) -> int:
    store = load(args.snapshot)
    if args.vector is not None:
        query_vec = _parse_vector(args.vector)
    else:
        query_vec = store.get(args.target_id).base_vector
    result, report = retrieval.query(store, query_vec, args.k)
    if args.save_back:
        save(store, args.snapshot)
    for rank, (item_id, score) in enumerate(result.entries, start=1):
        _info(f"{rank:3d}. {item_id}  {score:.6f}")
    _emit(
        {
            "step": result.step,
            "results": [{"id": item_id, "score": score} for item_id, score in result.entries],
            "promoted": report.promoted,
            "saved": bool(args.save_back),
        }
    )
    return 0


def _synthetic_store(count: int, dimension: int, seed: int, profile_name: str) -> MemoryStore:
    if count < 1 or dimension < 1:
        raise InvalidValue(f"synthetic corpus needs N >= 1 and d >= 1, got {count}, {dimension}")
    store = MemoryStore(profile(profile_name, dimension))
    rng = np.random.default_rng(seed)
    width = max(5, len(str(count - 1)))
    for i in range(count):
        vec = rng.normal(size=dimension)
        vec = vec / np.linalg.norm(vec)
        store.insert(f"item-{i:0{width}d}", vec)
    return store


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.snapshot is not None:
        store = load(args.snapshot)
    else:
        count, dimension, corpus_seed = args.synthetic
        store = _synthetic_store(count, dimension, corpus_seed, args.profile)
    snapshots = []
    latencies = []
    remembered_series = []
    if args.steps > 0:
        spec = workload.parse_workload(args.workload, args.steps, args.noise, seed)
        ids = store.ids()
        vectors = [store.get(item_id).base_vector for item_id in ids]
        stream = list(workload.generate(spec, ids, vectors))
        if args.dump:
            workload.dump_stream(stream, args.dump, seed)
        for _step_index, _target_id, query_vec in stream:
            _result, _report, latency = telemetry.timed_query(store, query_vec, args.k)
            latencies.append(latency)
            snapshots.append(telemetry.snapshot(store))
            remembered_series.append(store.remembered_total)
    if args.report:
        telemetry.export_csv(snapshots, args.report, record_type=telemetry.StatsSnapshot)
    if args.latency:
        telemetry.export_csv(latencies, args.latency, record_type=telemetry.LatencyRecord)
    if args.figures:
        from . import figures

        for path in figures.render_report(snapshots, latencies, args.figures):
            _info(f"wrote {path}")
    stab = telemetry.stabilization(remembered_series)
    verdict = "PASS" if stab["passed"] else "FAIL"
    summary = telemetry.summarize(store, latencies)
    summary["stabilization"] = verdict
    _info(f"stabilization: {verdict}")
    _emit(summary)
    return 0


def _load_queries(path) -> list[dict]:
    queries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                query_id = raw["query_id"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad query record: {exc}") from exc
            if "vector" not in raw and "target_id" not in raw:
                raise ParseError(f"{path}:{lineno}: query needs a vector or a target_id")
            queries.append(
                {
                    "query_id": str(query_id),
                    "vector": raw.get("vector"),
                    "target_id": raw.get("target_id"),
                }
            )
    return queries


def cmd_bench(args) -> int:
    store = load(args.snapshot)
    queries = _load_queries(args.queries)
    judgments = load_judgments(args.qrels)
    names = [name.strip() for name in args.metrics.split(",") if name.strip()]
    unknown = [name for name in names if name not in METRIC_FUNCS]
    if unknown:
        raise InvalidValue(f"unknown metrics {unknown}; choose from {sorted(METRIC_FUNCS)}")
    per_metric: dict[str, list[float]] = {name: [] for name in names}
    skipped = []
    evaluated = 0
    for entry in queries:
        query_id = entry["query_id"]
        judgment = judgments.get(query_id)
        if judgment is None:
            _info(f"warning: no qrels for query {query_id!r}, skipped")
            skipped.append(query_id)
            continue
        if entry["vector"] is not None:
            query_vec = np.asarray(entry["vector"], dtype=np.float64)
        else:
            query_vec = store.get(entry["target_id"]).base_vector
        result = retrieval.top_k(store, query_vec, args.k)
        if args.mode == "dynamic":
            engine.step(store, result.ids())
        ranked = result.ids()
        for name in names:
            per_metric[name].append(METRIC_FUNCS[name](ranked, judgment, args.k))
        evaluated += 1
    means = {name: aggregate(values) if values else None for name, values in per_metric.items()}
    for name in names:
        if means[name] is not None:
            _info(f"{name}@{args.k}: {means[name]:.4f}")
    _emit(
        {
            "mode": args.mode,
            "k": args.k,
            "queries": evaluated,
            "skipped": skipped,
            "metrics": means,
        }
    )
    return 0


def cmd_stats(args) -> int:
    store = load(args.snapshot)
    snap = telemetry.snapshot(store)
    _emit(dataclasses.asdict(snap))
    return 0


def cmd_prune(args) -> int:
    store = load(args.snapshot)
    removed = engine.prune(store, args.threshold)
    save(store, args.out)
    _info(f"removed {len(removed)} items")
    _emit({"removed": len(removed), "removed_ids": removed, "snapshot": str(args.out)})
    return 0


def cmd_set(args) -> int:
    store = load(args.snapshot)
    if args.alpha is not None:
        set_alpha_runtime(store, args.alpha)
    elif args.theta is not None:
        set_theta_runtime(store, args.theta)
    else:
        set_gamma_runtime(store, args.gamma)
    save(store, args.out)
    cfg = store.config
    _emit(
        {
            "theta": cfg.theta,
            "gamma": cfg.gamma,
            "alpha": cfg.alpha,
            "prune_threshold": cfg.prune_threshold,
            "dimension": cfg.dimension,
            "snapshot": str(args.out),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armstore",
        description="Adaptive vector memory store with selective consolidation and decay.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="build a snapshot from JSONL embeddings")
    p.add_argument("--input", required=True, help="JSONL file: {id, vector} per line")
    p.add_argument("--out", required=True, help="snapshot path to write")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--profile", default="balanced", help="policy preset name")
    group.add_argument("--config", help="JSON config file")
    p.add_argument("--normalize", action="store_true", help="L2-normalize vectors on ingest")
    p.add_argument("--theta", type=int, help="override remembrance threshold")
    p.add_argument("--gamma", type=int, help="override grace period")
    p.add_argument("--alpha", type=float, help="override decay rate")
    p.add_argument("--prune-threshold", dest="prune_threshold", type=float)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", help="run one query step against a snapshot")
    p.add_argument("--snapshot", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--vector", help="comma-separated floats")
    group.add_argument("--target-id", dest="target_id", help="use a stored item's vector")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--save-back", dest="save_back", action="store_true",
                   help="persist the updated store to the snapshot path")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("simulate", help="drive a synthetic workload and record telemetry")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--snapshot")
    group.add_argument("--synthetic", nargs=3, type=int, metavar=("N", "D", "SEED"),
                       help="random unit-norm corpus: item count, dimension, seed")
    p.add_argument("--workload", default="zipf:1.1", help="uniform | zipf:S | drift:S:SWITCH")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--noise", type=float, default=0.0, help="query noise sigma")
    p.add_argument("--profile", default="balanced", help="policy preset for synthetic corpora")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--seed", type=int, help="workload seed (default: ARM_SEED or 42)")
    p.add_argument("--report", help="write per-step stats CSV here")
    p.add_argument("--latency", help="write per-step latency CSV here")
    p.add_argument("--dump", help="write the workload stream CSV here")
    p.add_argument("--figures", help="render PNG figures into this directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="score a query set against qrels")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--queries", required=True, help="JSONL: {query_id, vector | target_id}")
    p.add_argument("--qrels", required=True, help="JSONL: {query_id, relevant: {id: grade}}")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--metrics", default="ndcg,precision,recall")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--dynamic", dest="mode", action="store_const", const="dynamic",
                      help="apply remembrance updates while benchmarking (default)")
    mode.add_argument("--frozen", dest="mode", action="store_const", const="frozen",
                      help="static index: skip all updates")
    p.set_defaults(func=cmd_bench, mode="dynamic")

    p = sub.add_parser("stats", help="print a telemetry snapshot of a store")
    p.add_argument("--snapshot", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("prune", help="drop weak unremembered items")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("set", help="adjust one policy knob on a snapshot")
    p.add_argument("--snapshot", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--alpha", type=float)
    group.add_argument("--theta", type=int)
    group.add_argument("--gamma", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_set)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        return args.func(args)
    except ValidationError as exc:
        _info(f"error: {exc}")
        return 2
    except ArmError as exc:
        _info(f"error: {exc}")
        return 1
    except OSError as exc:
        _info(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
