from __future__ import annotations

import json

import numpy as np
import pytest

from flatpack.corpus import Category
from flatpack.errors import ContractError
from flatpack.retrieval import (
    MAGIC,
    EmbeddingFormatError,
    EmbeddingMatrix,
    default_manifest_path,
    load_embeddings,
    retrieve_similar,
    write_embeddings,
)

from conftest import FIXTURE_EMBEDDINGS, fabricate_corpus, fabricate_item


def brute_force_knn(ids, rows, query, k):
    """Independent O(n*dim) oracle with the same (distance, id) ordering."""
    scored = []
    for item_id, row in zip(ids, rows):
        d2 = 0.0
        for a, b in zip(row.tolist(), query.tolist()):
            d2 += (float(a) - float(b)) ** 2
        scored.append((d2, item_id))
    scored.sort()
    return [item_id for _, item_id in scored[:k]]


def uniform_corpus(ids):
    return fabricate_corpus([fabricate_item(i, Category.CHAIR, 4) for i in ids])


class TestFormat:
    def test_write_load_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        rows = rng.standard_normal((3, 512)).astype(np.float32)
        ids = ["Chair_a", "Chair_b", "Chair_c"]
        path = tmp_path / "vecs.bin"
        write_embeddings(path, ids, rows)
        emb = load_embeddings(path)
        assert emb.ids == tuple(ids)
        assert emb.dim == 512
        assert emb.rows.tobytes() == rows.tobytes()

    def test_magic_mismatch(self, tmp_path):
        path = tmp_path / "vecs.bin"
        write_embeddings(path, ["a"], np.zeros((1, 4), dtype=np.float32))
        data = bytearray(path.read_bytes())
        data[0] = ord("X")
        path.write_bytes(bytes(data))
        with pytest.raises(EmbeddingFormatError, match="magic"):
            load_embeddings(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "vecs.bin"
        write_embeddings(path, ["a", "b"], np.zeros((2, 4), dtype=np.float32))
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(EmbeddingFormatError, match="payload"):
            load_embeddings(path)

    def test_manifest_count_mismatch(self, tmp_path):
        path = tmp_path / "vecs.bin"
        write_embeddings(path, ["a", "b", "c"], np.zeros((3, 4), dtype=np.float32))
        manifest = default_manifest_path(path)
        lines = manifest.read_text().splitlines()
        manifest.write_text("\n".join(lines[:2]) + "\n")
        with pytest.raises(EmbeddingFormatError, match="manifest"):
            load_embeddings(path)

    def test_header_fields(self, tmp_path):
        path = tmp_path / "vecs.bin"
        write_embeddings(path, ["x"], np.zeros((1, 7), dtype=np.float32))
        raw = path.read_bytes()
        assert raw[:8] == MAGIC
        assert int.from_bytes(raw[8:12], "little") == 1
        assert int.from_bytes(raw[12:16], "little") == 7

    def test_manifest_is_jsonl(self, tmp_path):
        path = tmp_path / "vecs.bin"
        write_embeddings(path, ["a", "b"], np.zeros((2, 4), dtype=np.float32))
        records = [json.loads(line) for line in default_manifest_path(path).read_text().splitlines()]
        assert records == [{"row": 0, "id": "a"}, {"row": 1, "id": "b"}]

    def test_fixture_embeddings_are_512d(self):
        emb = load_embeddings(FIXTURE_EMBEDDINGS)
        assert emb.dim == 512
        assert len(emb) == 13


class TestRetrieveSimilar:
    def _matrix(self, n=6, dim=16, seed=0):
        rng = np.random.default_rng(seed)
        ids = tuple(f"Chair_{chr(ord('a') + i)}" for i in range(n))
        rows = rng.standard_normal((n, dim)).astype(np.float32)
        return EmbeddingMatrix(ids=ids, dim=dim, rows=rows), uniform_corpus(list(ids))

    def test_exact_row_ranks_first_with_zero_distance(self):
        emb, corpus = self._matrix()
        result = retrieve_similar(emb, emb.rows[2], "Chair_a", Category.CHAIR, 3, corpus)
        assert result.top() == emb.ids[2]
        assert result.ranked[0][1] == 0.0

    def test_target_always_excluded(self):
        emb, corpus = self._matrix()
        result = retrieve_similar(emb, emb.rows[0], emb.ids[0], Category.CHAIR, 5, corpus)
        assert emb.ids[0] not in result.ids()

    def test_scarcity_returns_fewer(self):
        emb, corpus = self._matrix(n=3)
        result = retrieve_similar(emb, emb.rows[0], emb.ids[0], Category.CHAIR, 3, corpus)
        assert len(result) == 2

    def test_dim_mismatch(self):
        emb, corpus = self._matrix(dim=8)
        with pytest.raises(ContractError, match="dim"):
            retrieve_similar(emb, np.zeros(9), "Chair_a", Category.CHAIR, 1, corpus)

    def test_category_filter(self):
        items = [
            fabricate_item("Chair_a", Category.CHAIR, 3),
            fabricate_item("Chair_b", Category.CHAIR, 3),
            fabricate_item("Table_c", Category.TABLE, 3),
        ]
        corpus = fabricate_corpus(items)
        rows = np.eye(3, dtype=np.float32)
        emb = EmbeddingMatrix(ids=("Chair_a", "Chair_b", "Table_c"), dim=3, rows=rows)
        filtered = retrieve_similar(emb, rows[2], "Chair_a", Category.CHAIR, 5, corpus)
        assert filtered.ids() == ["Chair_b"]
        unfiltered = retrieve_similar(emb, rows[2], "Chair_a", None, 5, corpus)
        assert unfiltered.ids() == ["Table_c", "Chair_b"]

    def test_duplicate_vectors_tie_break_by_id(self):
        rows = np.zeros((3, 4), dtype=np.float32)
        ids = ("Chair_c", "Chair_a", "Chair_b")
        emb = EmbeddingMatrix(ids=ids, dim=4, rows=rows)
        corpus = uniform_corpus(list(ids))
        result = retrieve_similar(emb, np.zeros(4), "Chair_z", Category.CHAIR, 3, corpus)
        assert result.ids() == ["Chair_a", "Chair_b", "Chair_c"]

    def test_distances_non_decreasing(self):
        emb, corpus = self._matrix(n=12, dim=32, seed=5)
        result = retrieve_similar(emb, emb.rows[1], emb.ids[1], Category.CHAIR, 8, corpus)
        distances = [d for _, d in result.ranked]
        assert distances == sorted(distances)

    def test_matches_brute_force_oracle(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            n, dim = 60, 24
            ids = tuple(f"Chair_{i:03d}" for i in range(n))
            rows = rng.standard_normal((n, dim)).astype(np.float32)
            emb = EmbeddingMatrix(ids=ids, dim=dim, rows=rows)
            corpus = uniform_corpus(list(ids))
            query = rng.standard_normal(dim).astype(np.float32)
            for k in (1, 3, 5):
                got = retrieve_similar(emb, query, "Chair_none", Category.CHAIR, k, corpus)
                assert got.ids() == brute_force_knn(ids, rows, query, k)
