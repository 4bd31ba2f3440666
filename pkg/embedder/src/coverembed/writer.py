"""RAREMB1 vector-file emission.

Framing: 8 ASCII magic bytes "RAREMB1\\n", little-endian u32 count and
u32 dim, then count x dim float32 rows. Ids go to a JSON-lines companion
manifest at ``<vectors file>.jsonl`` (one {"row": i, "id": s} per row).
Both files are written atomically (temp file + rename) so a crashed run
never leaves a half-written index.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"RAREMB1\n"
_HEADER = struct.Struct("<II")


def manifest_path_for(vectors_path: Path | str) -> Path:
    vectors_path = Path(vectors_path)
    return vectors_path.with_name(vectors_path.name + ".jsonl")


def write_vectors(path: Path | str, ids: list[str], rows: np.ndarray) -> None:
    path = Path(path)
    rows = np.ascontiguousarray(rows, dtype="<f4")
    if rows.ndim != 2 or rows.shape[0] != len(ids):
        raise ValueError(f"rows shape {rows.shape} does not match {len(ids)} ids")

    payload = MAGIC + _HEADER.pack(rows.shape[0], rows.shape[1]) + rows.tobytes()
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)

    manifest = manifest_path_for(path)
    lines = "".join(
        json.dumps({"row": i, "id": item_id}, sort_keys=True) + "\n"
        for i, item_id in enumerate(ids)
    )
    tmp = manifest.with_name(manifest.name + ".tmp")
    tmp.write_text(lines)
    os.replace(tmp, manifest)
