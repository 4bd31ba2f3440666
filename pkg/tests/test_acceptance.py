"""Acceptance suite: one test per criterion, at the stated tolerances.

The conftest hook prints one ACCEPTANCE <name>: PASS/FAIL line per test.
Criteria 3 and 11 additionally verify against the real 102-item dataset
when FLATPACK_IKEA_ROOT points at it; otherwise the fixture corpus
carries the check.
"""

from __future__ import annotations

import json
import math
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from flatpack.corpus import Category, ConnectionSet, compute_stats, feasible_order, load_corpus
from flatpack.harness import (
    CROSS_CATEGORY,
    WITHIN_CATEGORY,
    ExperimentConfig,
    run_experiment,
)
from flatpack.metrics import aggregate, error_breakdown, pearson, score_item
from flatpack.partviz import parse_obj, render_parts_overview
from flatpack.partviz.overview import LABEL_STRIP_PX
from flatpack.planner import ParseTier, PredictionMethod, ProviderSpec, ScriptedProvider, parse_prediction
from flatpack.retrieval import (
    EmbeddingMatrix,
    bm25_query,
    build_bm25,
    load_embeddings,
    retrieve_similar,
)
from flatpack.simulator import run_rra_loop

from conftest import FIXTURE_CORPUS_ROOT, FIXTURE_EMBEDDINGS, fabricate_corpus, fabricate_item
from test_parsing import _adversarial_text
from test_partviz import UNIT_CUBE_OBJ

REAL_ROOT = os.environ.get("FLATPACK_IKEA_ROOT")


def test_01_table6_consistency(fixture_corpus):
    started = time.monotonic()
    n = 60
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    gt = ConnectionSet.from_pairs(all_pairs[:1131])
    pred = ConnectionSet.from_pairs(all_pairs[:420] + all_pairs[1131 : 1131 + 323])
    item = fabricate_item("Shelf_micro", Category.SHELF, n, connections=())

    gt_total, pred_total, tp, fn, fp = error_breakdown([(item, pred, gt)])
    assert (gt_total, pred_total, tp) == (1131, 743, 420)

    report = aggregate([(item, score_item(pred, gt))])
    micro = report.micro
    assert (micro.tp_total + micro.fn_total, micro.tp_total + micro.fp_total) == (1131, 743)
    # each reported share within +/- 0.05 percentage points
    assert abs(micro.micro_recall * 100 - 37.1) <= 0.05
    assert abs(micro.missing_share * 100 - 62.9) <= 0.05
    assert abs(micro.extra_share * 100 - 43.5) <= 0.05
    assert time.monotonic() - started < 1.0


def test_02_oracle_pipeline(fixture_corpus, tmp_path):
    assert len(fixture_corpus) >= 10
    assert min(i.part_count for i in fixture_corpus) == 3
    assert max(i.part_count for i in fixture_corpus) == 21

    started = time.monotonic()
    config = ExperimentConfig(
        corpus_root=FIXTURE_CORPUS_ROOT,
        methods=[
            PredictionMethod.zero_shot(),
            PredictionMethod.cover_page(),
            PredictionMethod.rag_images(3),
            PredictionMethod.full_manual(),
            PredictionMethod.oracle(),
        ],
        provider=ProviderSpec(kind="oracle_mock"),
        output_dir=tmp_path / "oracle_run",
        embeddings_path=FIXTURE_EMBEDDINGS,
    )
    reports = run_experiment(config, corpus=fixture_corpus)
    elapsed = time.monotonic() - started
    for key, report in reports.items():
        assert report.macro_f1 == 1.0, key
        assert report.exact_match_rate == 1.0, key
    assert elapsed < 5.0, f"oracle pipeline took {elapsed:.2f}s"


def test_03_bm25_perfect_retrieval(fixture_corpus):
    for corpus in filter(None, [fixture_corpus, load_corpus(REAL_ROOT) if REAL_ROOT else None]):
        index = build_bm25(corpus)
        hits = sum(
            bm25_query(index, f"{item.category.value} {item.name}", 1).top() == item.id
            for item in corpus
        )
        assert hits == len(corpus), f"precision@1 {hits}/{len(corpus)}"


def test_04_knn_matches_bruteforce():
    dim = 512
    for trial in range(100):
        rng = np.random.default_rng(trial)
        ids = tuple(f"Chair_{i:03d}" for i in range(200))
        rows = rng.standard_normal((200, dim)).astype(np.float32)
        emb = EmbeddingMatrix(ids=ids, dim=dim, rows=rows)
        corpus = fabricate_corpus([fabricate_item(i, Category.CHAIR, 4) for i in ids])
        query = rng.standard_normal(dim).astype(np.float32)

        query64 = [float(v) for v in query]
        scored = []
        for item_id, row in zip(ids, rows):
            d2 = 0.0
            for a, b in zip(row.tolist(), query64):
                diff = a - b
                d2 += diff * diff
            scored.append((d2, item_id))
        scored.sort()

        for k in (1, 3, 5):
            got = retrieve_similar(emb, query, "Chair_none", Category.CHAIR, k, corpus)
            assert got.ids() == [item_id for _, item_id in scored[:k]], (trial, k)


def test_05_leakage_and_category_filter(fixture_corpus):
    emb = load_embeddings(FIXTURE_EMBEDDINGS)
    for item in fixture_corpus:
        for k in (1, 3, 5):
            for scope in (WITHIN_CATEGORY, CROSS_CATEGORY):
                category = item.category if scope == WITHIN_CATEGORY else None
                result = retrieve_similar(emb, emb.row_for(item.id), item.id, category, k, fixture_corpus)
                assert item.id not in result.ids(), (item.id, k, scope)
                if scope == WITHIN_CATEGORY:
                    for candidate in result.ids():
                        assert fixture_corpus.get(candidate).category == item.category


def test_06_parser_robustness():
    schema_reply = '{"connections": [{"part1": 0, "part2": 1}, {"part1": 1, "part2": 2}]}'
    outcome = parse_prediction(schema_reply, 4)
    assert outcome.parse_tier is ParseTier.STRICT
    assert outcome.parsed.to_list() == [[0, 1], [1, 2]]
    fenced = parse_prediction(f"```json\n{schema_reply}\n```", 4)
    assert fenced.parsed.to_list() == [[0, 1], [1, 2]]

    rng = random.Random(20240901)
    for case in range(10_000):
        part_count = rng.randrange(1, 22)
        result = parse_prediction(_adversarial_text(rng), part_count)
        for c in result.parsed:
            assert 0 <= c.a < c.b < part_count, case
        if result.parse_tier is ParseTier.FAILED:
            assert len(result.parsed) == 0, case

    assert parse_prediction("", 4).parse_tier is ParseTier.FAILED
    assert parse_prediction("total nonsense", 4).parse_tier is ParseTier.FAILED


def test_07_metric_identities():
    rng = random.Random(424242)
    for case in range(10_000):
        n = rng.randrange(1, 22)
        all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        pred = ConnectionSet.from_pairs(rng.sample(all_pairs, rng.randrange(len(all_pairs) + 1)) if all_pairs else [])
        gt = ConnectionSet.from_pairs(rng.sample(all_pairs, rng.randrange(len(all_pairs) + 1)) if all_pairs else [])
        m = score_item(pred, gt)
        assert m.tp + m.fn == len(gt), case
        assert m.tp + m.fp == len(pred), case
        if m.precision + m.recall > 0:
            assert min(m.precision, m.recall) - 1e-12 <= m.f1 <= max(m.precision, m.recall) + 1e-12, case
        assert (m.f1 == 1.0) == m.exact, case

        perm = list(range(n))
        rng.shuffle(perm)
        pred_p = ConnectionSet.from_pairs([(perm[c.a], perm[c.b]) for c in pred])
        gt_p = ConnectionSet.from_pairs([(perm[c.a], perm[c.b]) for c in gt])
        assert score_item(pred_p, gt_p) == m, case


def test_08_pearson_correctness():
    anti = pearson([1.0, 2.0, 3.0], [0.9, 0.6, 0.3])
    assert abs(anti + 1.0) <= 1e-9
    same = pearson([4.0, 7.0, 9.0, 12.0], [4.0, 7.0, 9.0, 12.0])
    assert abs(same - 1.0) <= 1e-9
    assert pearson([2.0, 2.0, 2.0], [0.1, 0.9, 0.4]) is None


def test_09_simulator_determinism_and_feasibility(fixture_corpus):
    def script_for(item, order):
        replies = [json.dumps({"action": "fetch", "part": k}) for k in order]
        return replies + [json.dumps({"action": "complete"})]

    for item in list(fixture_corpus)[:4]:
        order = feasible_order(item.ground_truth, item.part_count)
        budget = item.part_count + 1
        log = run_rra_loop(
            item, ScriptedProvider(script_for(item, order)), PredictionMethod.zero_shot(),
            budget, fixture_corpus, seed=9,
        )
        assert log.outcome.kind == "success", item.id
        assert len(log.primitives) == 4 * item.part_count, item.id

        again = run_rra_loop(
            item, ScriptedProvider(script_for(item, order)), PredictionMethod.zero_shot(),
            budget, fixture_corpus, seed=9,
        )
        assert log.to_jsonl() == again.to_jsonl(), item.id

    # deliberately order-violating script: start with two non-adjacent parts
    # of the same (connected) graph, then deliver the rest
    def violating_order(item):
        for a in range(item.part_count):
            for b in range(item.part_count):
                if a != b and (min(a, b), max(a, b)) not in item.ground_truth:
                    rest = [p for p in range(item.part_count) if p not in (a, b)]
                    return [a, b] + rest
        return None  # complete graph: every order is feasible

    item = next(i for i in fixture_corpus if violating_order(i) is not None)
    violating = violating_order(item)
    log = run_rra_loop(
        item, ScriptedProvider(script_for(item, violating)), PredictionMethod.zero_shot(),
        item.part_count + 1, fixture_corpus, seed=9,
    )
    assert log.outcome.kind == "partial"
    assert log.outcome.delivered == item.part_count


def test_10_obj_and_render():
    mesh = parse_obj(UNIT_CUBE_OBJ)
    assert len(mesh.vertices) == 8
    assert len(mesh.faces) == 12

    first = render_parts_overview([mesh], ["part_0"], 64).to_ppm_bytes()
    second = render_parts_overview([mesh], ["part_0"], 64).to_ppm_bytes()
    assert first == second

    grid = render_parts_overview([mesh] * 5, [f"part_{i}" for i in range(5)], 40)
    assert grid.width == 3 * 40
    assert grid.height == 2 * (40 + LABEL_STRIP_PX)


def test_11_stats(fixture_corpus):
    stats = compute_stats(fixture_corpus)
    parts = [i.part_count for i in fixture_corpus]
    conns = [len(i.ground_truth) for i in fixture_corpus]
    assert stats.total_parts == sum(parts)
    assert stats.total_connections == sum(conns)
    assert stats.parts_mean == sum(parts) / len(parts)
    assert math.isclose(
        stats.parts_std, math.sqrt(sum((p - stats.parts_mean) ** 2 for p in parts) / len(parts))
    )
    assert stats.parts_min == 3 and stats.parts_max == 21

    if REAL_ROOT:
        real = compute_stats(load_corpus(REAL_ROOT))
        assert real.item_count == 102
        assert real.total_parts == 754
        assert real.total_connections == 1131
        assert abs(real.parts_mean - 7.39) <= 0.005
        assert abs(real.connections_mean - 11.09) <= 0.005


def test_12_secondary_embedder_round_trip(tmp_path):
    pytest.importorskip("coverembed", reason="embedder sidecar not installed")
    images = []
    for i in range(3):
        path = tmp_path / f"cover_{i}.ppm"
        path.write_bytes(b"P6\n1 1\n255\n" + bytes([40 * i, 0, 255 - 40 * i]))
        images.append({"id": f"Chair_item{i}", "path": str(path)})
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(images))

    def emit(out_name: str) -> Path:
        out = tmp_path / out_name
        subprocess.run(
            [
                sys.executable, "-m", "coverembed.cli", "embed-images",
                "--manifest", str(manifest), "--out", str(out), "--backend", "hash",
            ],
            check=True,
            capture_output=True,
        )
        return out

    first = emit("vecs_a.bin")
    second = emit("vecs_b.bin")
    assert first.read_bytes() == second.read_bytes(), "re-emission must be bitwise identical"

    emb = load_embeddings(first)
    assert emb.dim == 512
    assert emb.ids == ("Chair_item0", "Chair_item1", "Chair_item2")

    corpus = fabricate_corpus([fabricate_item(e["id"], Category.CHAIR, 4) for e in images])
    result = retrieve_similar(emb, emb.row_for("Chair_item1"), "Chair_item0", Category.CHAIR, 1, corpus)
    assert result.top() == "Chair_item1"
    assert result.ranked[0][1] == 0.0
