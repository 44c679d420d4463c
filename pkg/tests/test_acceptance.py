"""Acceptance suite: one test per release criterion, oracle-checked.

Each test prints a single verdict line (visible with ``pytest -s``);
the test name itself carries the criterion number for ``pytest -v``.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from armstore import (
    EagerReferenceStore,
    InvalidValue,
    Judgment,
    MemoryConfig,
    MemoryStore,
    load,
    ndcg_at_k,
    precision_at_k,
    prune,
    recall_at_k,
    save,
    set_alpha_runtime,
    step,
    top_k,
)
from armstore import profile as make_profile
from armstore.cli import main as cli_main
from armstore.telemetry import timed_query
from armstore.workload import WorkloadSpec, generate

PROFILE_NAMES = ("balanced", "ultra_efficient", "aggressive")


def report(number, text):
    print(f"criterion {number:02d}: PASS - {text}")


def unit_rows(rng, n, d):
    mat = rng.normal(size=(n, d))
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def build_twins(config, ids, rows):
    lazy = MemoryStore(config)
    eager = EagerReferenceStore(config)
    for item_id, row in zip(ids, rows):
        lazy.insert(item_id, row)
        eager.insert(item_id, row)
    return lazy, eager


def random_workload_spec(rng, n_steps):
    kind = ("uniform", "zipf", "drift")[int(rng.integers(0, 3))]
    seed = int(rng.integers(0, 2**31))
    if kind == "uniform":
        return WorkloadSpec("uniform", n_steps, seed)
    if kind == "zipf":
        return WorkloadSpec("zipf", n_steps, seed, s=float(rng.uniform(0.8, 1.6)))
    return WorkloadSpec(
        "drift", n_steps, seed,
        s=float(rng.uniform(0.8, 1.6)),
        switch_step=int(rng.integers(1, n_steps)),
    )


def assert_state_parity(lazy, eager, rel):
    for item_id in lazy.ids():
        item = lazy.get(item_id)
        assert item.access_count == eager.access_count(item_id)
        assert item.last_access_step == eager.last_access_step(item_id)
        assert item.remembered == eager.remembered(item_id)
        assert lazy.effective_strength(item_id) == pytest.approx(
            eager.effective_strength(item_id), rel=rel
        )


def test_criterion_01_lazy_eager_equivalence():
    started = time.monotonic()
    n_items, dimension, n_steps, k = 200, 16, 500, 5
    for run in range(50):
        rng = np.random.default_rng(run)
        profile_name = PROFILE_NAMES[int(rng.integers(0, 3))]
        config = make_profile(profile_name, dimension)
        rows = unit_rows(rng, n_items, dimension)
        ids = [f"item-{i:03d}" for i in range(n_items)]
        lazy, eager = build_twins(config, ids, rows)
        spec = random_workload_spec(rng, n_steps)
        for step_index, _, query_vec in generate(spec, ids, rows):
            retrieved = top_k(lazy, query_vec, k).ids()
            assert retrieved == eager.top_k_ids(query_vec, k)
            step(lazy, retrieved)
            eager.step(retrieved)
            if step_index % 100 == 0:
                assert_state_parity(lazy, eager, rel=1e-9)
        assert_state_parity(lazy, eager, rel=1e-9)
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    report(1, f"50 random workloads match the eager reference ({elapsed:.1f}s)")


def test_criterion_02_closed_form_decay():
    store = MemoryStore(MemoryConfig(theta=3, gamma=5, alpha=0.95, dimension=2))
    store.insert("a", [1, 0])  # accessed once at t=0 (insert counts as the access)
    by_multiplication = 1.0
    for t in range(0, 201):
        if t > 0:
            step(store, [])
            if t - 5 > 0:
                by_multiplication *= 0.95
        closed_form = 0.95 ** max(0, t - 5)
        got = store.effective_strength("a")
        assert got == pytest.approx(closed_form, abs=1e-12)
        assert got == pytest.approx(by_multiplication, abs=1e-12)
    report(2, "idle-item strength equals 0.95^max(0, t-5) for t <= 200")


def test_criterion_03_promotion_freezes_strength():
    store = MemoryStore(MemoryConfig(theta=3, gamma=5, alpha=0.95, dimension=2))
    store.insert("a", [1, 0])
    reports = [step(store, ["a"]) for _ in range(3)]
    assert reports[0].promoted == [] and reports[1].promoted == []
    assert "a" in reports[2].promoted
    frozen = store.effective_strength("a")
    assert frozen == 1.0
    for _ in range(1000):
        step(store, [])
        assert store.effective_strength("a") == frozen
    assert store.pending_decays("a") == 0
    report(3, "third access promotes; strength frozen across 1,000 idle steps")


def test_criterion_04_grace_boundary_is_strict():
    for gamma in (0, 1, 5, 20):
        store = MemoryStore(MemoryConfig(theta=99, gamma=gamma, alpha=0.5, dimension=2))
        store.insert("a", [1, 0])
        step(store, ["a"])  # tau = 1
        for _ in range(gamma):
            step(store, [])
        assert store.clock - store.get("a").last_access_step == gamma
        assert store.pending_decays("a") == 0
        assert store.effective_strength("a") == 1.0
        step(store, [])  # first step strictly past the grace period
        assert store.pending_decays("a") == 1
        assert store.effective_strength("a") == 0.5
    report(4, "t - tau = gamma decays nothing for gamma in {0, 1, 5, 20}")


def build_corpus_store(n_items, dimension, seed):
    config = make_profile("balanced", dimension)
    store = MemoryStore(config)
    rng = np.random.default_rng(seed)
    rows = unit_rows(rng, n_items, dimension)
    width = len(str(n_items - 1))
    ids = [f"item-{i:0{width}d}" for i in range(n_items)]
    for item_id, row in zip(ids, rows):
        store.insert(item_id, row)
    return store, ids, rows


def median_update_micros(n_items, n_steps, k=5):
    store, ids, rows = build_corpus_store(n_items, 16, seed=2)
    spec = WorkloadSpec("zipf", n_steps, seed=9, s=1.1)
    micros = []
    max_touched = 0
    for _, _, query_vec in generate(spec, ids, list(rows)):
        _, rep, lat = timed_query(store, query_vec, k)
        micros.append(lat.update_micros)
        max_touched = max(max_touched, rep.touched_count)
    return float(np.median(micros)), max_touched


def test_criterion_05_updates_are_o_of_k():
    median_large, max_touched = median_update_micros(50_000, 10_000)
    assert max_touched <= 5
    median_small, _ = median_update_micros(5_000, 3_000)
    ratio = median_large / median_small
    assert 0.5 <= ratio <= 2.0
    report(
        5,
        f"touched <= 5 over 10,000 steps at N=50,000; update medians "
        f"{median_small:.1f}us (N=5k) vs {median_large:.1f}us (N=50k), ratio {ratio:.2f}",
    )


def test_criterion_06_stabilization_dynamics():
    store, ids, rows = build_corpus_store(100, 16, seed=42)
    spec = WorkloadSpec("zipf", 1000, seed=42, s=1.1, noise_sigma=0.0)
    counts = []
    for _, _, query_vec in generate(spec, ids, rows):
        retrieved = top_k(store, query_vec, 5).ids()
        step(store, retrieved)
        counts.append(store.remembered_total)
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert len(set(counts[-200:])) == 1
    fraction = counts[-1] / 100
    assert 0.0 < fraction < 1.0
    report(6, f"remembered count rises then holds; final fraction {fraction:.2f}")


def first_principles_metrics(ranked, judgment, k):
    def dcg(grades):
        return sum(
            (2.0**g - 1.0) / math.log2(r + 1) for r, g in enumerate(grades[:k], 1)
        )

    observed = dcg([judgment.relevant.get(i, 0) for i in ranked])
    ideal = dcg(sorted(judgment.relevant.values(), reverse=True))
    positives = {i for i, g in judgment.relevant.items() if g > 0}
    hits = sum(1 for i in ranked[:k] if i in positives)
    return observed / ideal, hits / k, hits / len(positives)


def test_criterion_07_metric_oracles():
    rng = np.random.default_rng(7)
    for case in range(1000):
        universe = [f"d{i:02d}" for i in range(int(rng.integers(2, 21)))]
        judged_size = int(rng.integers(1, min(8, len(universe)) + 1))
        judged = list(rng.choice(universe, size=judged_size, replace=False))
        grades = {i: int(rng.integers(0, 4)) for i in judged}
        grades[judged[0]] = max(grades[judged[0]], 1)
        judgment = Judgment(query_id=f"q{case}", relevant=grades)
        ranked = list(rng.choice(universe, size=int(rng.integers(1, len(universe) + 1)), replace=False))
        k = int(rng.integers(1, 11))
        want_ndcg, want_p, want_r = first_principles_metrics(ranked, judgment, k)
        assert ndcg_at_k(ranked, judgment, k) == pytest.approx(want_ndcg, abs=1e-12)
        assert precision_at_k(ranked, judgment, k) == pytest.approx(want_p, abs=1e-12)
        assert recall_at_k(ranked, judgment, k) == pytest.approx(want_r, abs=1e-12)
        if len(grades) <= 7:
            best = max(
                sum((2.0**g - 1.0) / math.log2(r + 1) for r, g in enumerate(perm[:k], 1))
                for perm in itertools.permutations(grades.values())
            )
            observed = sum(
                (2.0**grades.get(i, 0) - 1.0) / math.log2(r + 1)
                for r, i in enumerate(ranked[:k], 1)
            )
            assert ndcg_at_k(ranked, judgment, k) == pytest.approx(observed / best, abs=1e-12)
    hand = ndcg_at_k(["miss", "hit"], Judgment(query_id="h", relevant={"hit": 1}), 2)
    assert hand == pytest.approx(0.630930, abs=1e-6)
    report(7, "1,000 random rankings match first principles; hand case 0.630930")


def test_criterion_08_constructed_benchmark_recall(tmp_path, capsys):
    dimension, n_items = 16, 10
    store = MemoryStore(make_profile("balanced", dimension))
    for i in range(n_items):
        vec = np.zeros(dimension)
        vec[i] = 1.0
        store.insert(f"unit-{i}", vec)
    snapshot_path = tmp_path / "bench.arm"
    save(store, snapshot_path)
    queries, qrels = [], []
    for i in range(n_items):
        vec = np.zeros(dimension)
        vec[i] = 1.0
        vec[(i + 1) % n_items] = 1.0
        queries.append({"query_id": f"q{i}", "vector": vec.tolist()})
        qrels.append(
            {"query_id": f"q{i}", "relevant": {f"unit-{i}": 1, f"unit-{(i + 1) % n_items}": 1}}
        )
    queries_path = tmp_path / "queries.jsonl"
    qrels_path = tmp_path / "qrels.jsonl"
    queries_path.write_text("\n".join(json.dumps(q) for q in queries) + "\n")
    qrels_path.write_text("\n".join(json.dumps(q) for q in qrels) + "\n")
    code = cli_main([
        "bench", "--snapshot", str(snapshot_path),
        "--queries", str(queries_path), "--qrels", str(qrels_path), "-k", "5",
    ])
    captured = capsys.readouterr()
    assert code == 0
    payload = json.loads(captured.out.strip().splitlines()[-1])
    assert payload["queries"] == n_items
    assert payload["metrics"]["recall"] == 1.0  # exact, no tolerance
    report(8, "constructed benchmark reports Recall@5 = 1.000 exactly")


def test_criterion_09_robust_reconfiguration(tmp_path, capsys):
    # invalid value via the library: store must stay bit-identical
    store = MemoryStore(MemoryConfig(theta=3, gamma=5, alpha=0.95, dimension=4))
    rng = np.random.default_rng(19)
    for i in range(10):
        store.insert(f"r{i}", rng.normal(size=4))
    step(store, ["r0"])
    for _ in range(10):
        step(store, [])
    before_path = tmp_path / "before.arm"
    after_path = tmp_path / "after.arm"
    save(store, before_path)
    with pytest.raises(InvalidValue):
        set_alpha_runtime(store, 1.5)
    save(store, after_path)
    assert before_path.read_bytes() == after_path.read_bytes()

    # invalid value via the CLI: exit 2, nothing written, input untouched
    out_path = tmp_path / "changed.arm"
    code = cli_main([
        "set", "--snapshot", str(before_path), "--alpha", "1.5", "--out", str(out_path)
    ])
    capsys.readouterr()
    assert code == 2
    assert not out_path.exists()
    assert before_path.read_bytes() == after_path.read_bytes()

    # valid switch 0.95 -> 0.90 after 4 events, then 3 more
    config = MemoryConfig(theta=99, gamma=5, alpha=0.95, dimension=2)
    lazy = MemoryStore(config)
    eager = EagerReferenceStore(MemoryConfig(theta=99, gamma=5, alpha=0.95, dimension=2))
    for twin in (lazy, eager):
        twin.insert("a", [1, 0])
    step(lazy, ["a"])
    eager.step(["a"])
    for _ in range(9):
        step(lazy, [])
        eager.step([])
    assert lazy.pending_decays("a") == 4
    set_alpha_runtime(lazy, 0.90)
    eager.set_alpha(0.90)
    for _ in range(3):
        step(lazy, [])
        eager.step([])
    want = 0.95**4 * 0.90**3
    assert lazy.effective_strength("a") == pytest.approx(eager.effective_strength("a"), rel=1e-9)
    assert lazy.effective_strength("a") == pytest.approx(want, rel=1e-9)
    report(9, "alpha=1.5 rejected with zero side effects; two-phase decay is exact")


def random_history_store(seed):
    rng = np.random.default_rng(seed)
    config = MemoryConfig(
        theta=int(rng.integers(1, 6)),
        gamma=int(rng.integers(0, 8)),
        alpha=float(rng.uniform(0.5, 0.99)),
        prune_threshold=float(rng.uniform(0.0, 0.01)),
        dimension=int(rng.integers(1, 25)),
    )
    store = MemoryStore(config)
    for i in range(int(rng.integers(0, 40))):
        store.insert(f"n{i:03d}", rng.normal(size=config.dimension))
    ids = store.ids()
    for _ in range(int(rng.integers(0, 60))):
        k = int(rng.integers(0, min(5, len(ids)) + 1)) if ids else 0
        chosen = list(rng.choice(ids, size=k, replace=False)) if k else []
        step(store, chosen)
    if ids and rng.random() < 0.3:
        set_alpha_runtime(store, float(rng.uniform(0.5, 0.99)))
    if ids and rng.random() < 0.3:
        prune(store, float(rng.uniform(0.0, 0.2)))
    return store


def test_criterion_10_persistence_round_trip_and_replay(tmp_path):
    for seed in range(100):
        store = random_history_store(seed)
        first = tmp_path / "first.arm"
        second = tmp_path / "second.arm"
        save(store, first)
        save(load(first), second)
        assert first.read_bytes() == second.read_bytes()

    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        n_items = int(rng.integers(20, 51))
        config = make_profile(PROFILE_NAMES[seed % 3], 8)
        rows = unit_rows(rng, n_items, 8)
        ids = [f"w{i:02d}" for i in range(n_items)]
        store = MemoryStore(config)
        for item_id, row in zip(ids, rows):
            store.insert(item_id, row)
        spec = random_workload_spec(rng, 120)
        stream = list(generate(spec, ids, rows))
        for _, _, query_vec in stream[:60]:
            step(store, top_k(store, query_vec, 4).ids())
        mid = tmp_path / "mid.arm"
        save(store, mid)
        resumed = load(mid)
        for _, _, query_vec in stream[60:]:
            expected = top_k(store, query_vec, 4)
            got = top_k(resumed, query_vec, 4)
            assert got.ids() == expected.ids()
            for (_, got_score), (_, want_score) in zip(got.entries, expected.entries):
                assert got_score == pytest.approx(want_score, abs=1e-12)
            step(store, expected.ids())
            step(resumed, got.ids())
        assert resumed.ids() == store.ids()
        for item_id in store.ids():
            assert resumed.get(item_id) == store.get(item_id)
            assert resumed.effective_strength(item_id) == pytest.approx(
                store.effective_strength(item_id), abs=1e-12
            )
    report(10, "100 bit-identical round trips; 10 mid-run snapshots replay exactly")


def test_criterion_11_decay_flips_the_ranking():
    # a matches the query best at full strength; b is consolidated early
    store = MemoryStore(MemoryConfig(theta=1, gamma=0, alpha=0.95, dimension=2))
    store.insert("a", [1, 0])
    store.insert("b", [0, 1])
    query_vec = [1.0, 0.6]
    assert top_k(store, query_vec, 1).ids() == ["a"]
    promoted = step(store, ["b"]).promoted  # t=1: b becomes exempt from decay
    assert promoted == ["b"]
    flip_step = None
    for _ in range(30):
        step(store, [])
        result = top_k(store, query_vec, 2)
        strength_a = 0.95**store.clock
        assert result.entries[result.ids().index("a")][1] == pytest.approx(
            1.0 * strength_a, rel=1e-12
        )
        assert result.entries[result.ids().index("b")][1] == pytest.approx(0.6, rel=1e-12)
        if result.ids()[0] == "b" and flip_step is None:
            flip_step = store.clock
    # 0.95^t drops below 0.6 at t = 10 and never recovers
    assert flip_step == 10
    assert top_k(store, query_vec, 2).ids() == ["b", "a"]
    report(11, "dot x strength scoring lets decay flip top-1 at the predicted step")
