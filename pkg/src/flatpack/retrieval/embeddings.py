"""Embedding matrix storage and exact nearest-neighbor lookup.

Vector files use the RAREMB1 framing: 8 ASCII magic bytes "RAREMB1\\n",
little-endian u32 count and u32 dim, then count x dim float32 rows.
Row ids live in a JSON-lines companion manifest (one {"row": i, "id": s}
per row), by default at ``<vectors file>.jsonl``.

The index is flat: a query is compared against every candidate row
(squared L2, float64 accumulation), which is exact and plenty at a few
hundred items.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import Category, Corpus
from ..errors import ContractError
from .ranking import RetrievalResult

MAGIC = b"RAREMB1\n"
_HEADER = struct.Struct("<II")


class EmbeddingFormatError(ValueError):
    """A vector file or its manifest does not match the RAREMB1 contract."""


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    dim: int
    rows: np.ndarray  # float32, shape (len(ids), dim)

    def __len__(self) -> int:
        return len(self.ids)

    def row_for(self, item_id: str) -> np.ndarray:
        return self.rows[self.ids.index(item_id)]


def default_manifest_path(vectors_path: Path | str) -> Path:
    vectors_path = Path(vectors_path)
    return vectors_path.with_name(vectors_path.name + ".jsonl")


def write_embeddings(
    path: Path | str,
    ids: list[str],
    rows: np.ndarray,
    manifest_path: Path | str | None = None,
) -> None:
    """Emit a RAREMB1 file and its id manifest atomically."""
    path = Path(path)
    rows = np.ascontiguousarray(rows, dtype="<f4")
    if rows.ndim != 2 or rows.shape[0] != len(ids):
        raise ContractError(f"rows shape {rows.shape} does not match {len(ids)} ids")
    if len(set(ids)) != len(ids):
        raise ContractError("duplicate ids in embedding manifest")

    payload = MAGIC + _HEADER.pack(rows.shape[0], rows.shape[1]) + rows.tobytes()
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)

    manifest = Path(manifest_path) if manifest_path else default_manifest_path(path)
    lines = "".join(
        json.dumps({"row": i, "id": item_id}, sort_keys=True) + "\n"
        for i, item_id in enumerate(ids)
    )
    tmp = manifest.with_name(manifest.name + ".tmp")
    tmp.write_text(lines)
    os.replace(tmp, manifest)


def load_embeddings(path: Path | str, manifest_path: Path | str | None = None) -> EmbeddingMatrix:
    path = Path(path)
    data = path.read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise EmbeddingFormatError(f"{path}: magic mismatch, not a RAREMB1 file")
    if len(data) < len(MAGIC) + _HEADER.size:
        raise EmbeddingFormatError(f"{path}: truncated header")
    count, dim = _HEADER.unpack_from(data, len(MAGIC))
    if dim < 1:
        raise EmbeddingFormatError(f"{path}: dim field must be positive")
    expected = len(MAGIC) + _HEADER.size + 4 * count * dim
    if len(data) != expected:
        raise EmbeddingFormatError(
            f"{path}: payload is {len(data)} bytes, expected {expected} for count={count} dim={dim}"
        )
    rows = np.frombuffer(data, dtype="<f4", offset=len(MAGIC) + _HEADER.size).reshape(count, dim)

    manifest = Path(manifest_path) if manifest_path else default_manifest_path(path)
    if not manifest.is_file():
        raise EmbeddingFormatError(f"{manifest}: companion manifest missing")
    entries: dict[int, str] = {}
    for lineno, line in enumerate(manifest.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        entries[record["row"]] = record["id"]
    if sorted(entries) != list(range(count)):
        raise EmbeddingFormatError(
            f"{manifest}: manifest rows do not match count field ({len(entries)} ids for count={count})"
        )
    ids = tuple(entries[i] for i in range(count))
    if len(set(ids)) != len(ids):
        raise EmbeddingFormatError(f"{manifest}: duplicate ids")
    return EmbeddingMatrix(ids=ids, dim=dim, rows=rows)


def retrieve_similar(
    emb: EmbeddingMatrix,
    query_vec: np.ndarray,
    target_id: str,
    category_filter: Category | None,
    k: int,
    corpus: Corpus,
) -> RetrievalResult:
    """k nearest candidates by squared L2 distance, ascending, ties by id.

    Candidates are corpus items sharing the filter category (all corpus
    items when the filter is None); the target itself is always excluded.
    Returns fewer than k when candidates are scarce.
    """
    query = np.asarray(query_vec, dtype=np.float64).reshape(-1)
    if query.shape[0] != emb.dim:
        raise ContractError(f"query vector has dim {query.shape[0]}, index has dim {emb.dim}")
    if k < 1:
        raise ContractError("k must be positive")

    scored: list[tuple[float, str]] = []
    for row_index, item_id in enumerate(emb.ids):
        if item_id == target_id or item_id not in corpus:
            continue
        if category_filter is not None and corpus.get(item_id).category != category_filter:
            continue
        delta = emb.rows[row_index].astype(np.float64) - query
        scored.append((float(np.dot(delta, delta)), item_id))
    scored.sort(key=lambda pair: (pair[0], pair[1]))
    return RetrievalResult(tuple((item_id, dist) for dist, item_id in scored[:k]))
