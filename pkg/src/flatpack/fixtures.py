"""Synthetic fixture corpus generation.

The real dataset is not distributable, so tests and demos run against a
deterministic stand-in: 13 items across all six categories with 3 to 21
parts each, procedurally generated part meshes, rendered overview and
manual-page images, connected ground-truth graphs, and a matching
RAREMB1 embedding file with one seeded 512-dim vector per item.

A couple of manifests use comma-group connection endpoints on purpose so
ingestion exercises subassembly expansion.
"""

from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path

import numpy as np

from .corpus import Category
from .partviz import Mesh, render_parts_overview, serialize_obj, write_ppm
from .retrieval import write_embeddings

EMBED_DIM = 512

# (category, name, part_count); names overlap deliberately so BM25 must
# separate e.g. "Chair arvika" from "Chair arvika_3" and "Bench arvika".
ITEM_SPECS: tuple[tuple[Category, str, int], ...] = (
    (Category.CHAIR, "arvika", 4),
    (Category.CHAIR, "arvika_3", 9),
    (Category.CHAIR, "borgen", 6),
    (Category.TABLE, "lomma", 5),
    (Category.TABLE, "selde", 8),
    (Category.BENCH, "arvika", 3),
    (Category.BENCH, "tranet", 7),
    (Category.SHELF, "kalvik", 18),
    (Category.SHELF, "runsta", 21),
    (Category.DESK, "micne", 12),
    (Category.DESK, "valto", 10),
    (Category.MISC, "orkyd", 14),
    (Category.MISC, "plonk", 16),
)

PAGE_CELL_PX = 48


def _rng_for(*parts) -> random.Random:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "little"))


def _box_mesh(dx: float, dy: float, dz: float) -> Mesh:
    corners = [
        (x * dx, y * dy, z * dz) for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)
    ]
    quads = [
        (0, 1, 3, 2),
        (4, 6, 7, 5),
        (0, 4, 5, 1),
        (2, 3, 7, 6),
        (0, 2, 6, 4),
        (1, 5, 7, 3),
    ]
    mesh = Mesh(vertices=corners)
    for a, b, c, d in quads:
        mesh.faces.append((a, b, c))
        mesh.faces.append((a, c, d))
    return mesh


def part_mesh(item_id: str, part_index: int, seed: int) -> Mesh:
    """A plank, rod, or panel shape chosen deterministically per part."""
    rng = _rng_for("mesh", seed, item_id, part_index)
    shape = rng.choice(("plank", "rod", "panel"))
    if shape == "plank":
        return _box_mesh(rng.uniform(2.0, 4.0), rng.uniform(0.8, 1.4), rng.uniform(0.2, 0.4))
    if shape == "rod":
        return _box_mesh(rng.uniform(0.2, 0.4), rng.uniform(0.2, 0.4), rng.uniform(2.5, 4.0))
    return _box_mesh(rng.uniform(1.5, 3.0), rng.uniform(0.1, 0.25), rng.uniform(1.5, 3.0))


def ground_truth_edges(item_id: str, part_count: int, seed: int) -> list[tuple[int, int]]:
    """A random connected graph: spanning tree plus a few extra edges."""
    rng = _rng_for("graph", seed, item_id)
    edges: set[tuple[int, int]] = set()
    for i in range(1, part_count):
        j = rng.randrange(i)
        edges.add((j, i))
    extra = rng.randrange(0, max(2, part_count // 2) + 1)
    attempts = 0
    while extra > 0 and attempts < 50 * part_count:
        attempts += 1
        a, b = rng.sample(range(part_count), 2)
        edge = (min(a, b), max(a, b))
        if edge not in edges:
            edges.add(edge)
            extra -= 1
    return sorted(edges)


def _steps_from_edges(edges: list[tuple[int, int]], part_count: int, per_step: int = 2) -> list[list[list[int]]]:
    """Chunk edges into steps ordered so each step attaches to built structure."""
    adjacency: dict[int, list[tuple[int, int]]] = {}
    for edge in edges:
        adjacency.setdefault(edge[0], []).append(edge)
        adjacency.setdefault(edge[1], []).append(edge)
    placed = {0}
    ordered: list[tuple[int, int]] = []
    remaining = set(edges)
    while remaining:
        frontier = sorted(e for e in remaining if e[0] in placed or e[1] in placed)
        if not frontier:  # disconnected graphs never occur here, but stay total
            frontier = [min(remaining)]
        edge = frontier[0]
        remaining.discard(edge)
        ordered.append(edge)
        placed.update(edge)
    return [
        [[a, b] for a, b in ordered[i : i + per_step]] for i in range(0, len(ordered), per_step)
    ]


def _manifest_connections(item_id: str, edges: list[tuple[int, int]], seed: int, grouped: bool):
    """Manifest form of the edge list; optionally re-expresses some edges
    sharing an endpoint as one comma-group entry (same expansion)."""
    if not grouped:
        return [[a, b] for a, b in edges]
    rng = _rng_for("group", seed, item_id)
    hub_candidates = [n for n in range(max(b for _, b in edges) + 1)]
    rng.shuffle(hub_candidates)
    for hub in hub_candidates:
        spokes = sorted({a if b == hub else b for a, b in edges if hub in (a, b)})
        if len(spokes) >= 2:
            chosen = spokes[:2]
            kept = [
                [a, b]
                for a, b in edges
                if not (hub in (a, b) and (a in chosen or b in chosen))
            ]
            return kept + [[",".join(str(s) for s in chosen), hub]]
    return [[a, b] for a, b in edges]


def _page_for_step(meshes: list[Mesh], labels: list[str], involved: list[int]):
    subset = [meshes[i] for i in involved]
    names = [labels[i] for i in involved]
    return render_parts_overview(subset, names, PAGE_CELL_PX)


def generate_item(out_dir: Path, category: Category, name: str, part_count: int, seed: int, grouped: bool) -> str:
    item_id = f"{category.value}_{name}"
    item_dir = out_dir / item_id
    item_dir.mkdir(parents=True, exist_ok=True)

    labels = [f"part_{i}" for i in range(part_count)]
    meshes = [part_mesh(item_id, i, seed) for i in range(part_count)]
    for i, mesh in enumerate(meshes):
        (item_dir / f"part_{i}.obj").write_text(serialize_obj(mesh))

    write_ppm(item_dir / "parts_overview.ppm", render_parts_overview(meshes, labels, PAGE_CELL_PX))

    edges = ground_truth_edges(item_id, part_count, seed)
    steps = _steps_from_edges(edges, part_count)

    pages = ["page_0.ppm"]
    write_ppm(item_dir / "page_0.ppm", render_parts_overview(meshes, labels, PAGE_CELL_PX))
    for page_no, step in enumerate(steps, start=1):
        involved = sorted({i for pair in step for i in pair})
        page_name = f"page_{page_no}.ppm"
        write_ppm(item_dir / page_name, _page_for_step(meshes, labels, involved))
        pages.append(page_name)

    manifest = {
        "id": item_id,
        "category": category.value,
        "name": name,
        "part_count": part_count,
        "pages": pages,
        "parts_overview": "parts_overview.ppm",
        "connections": _manifest_connections(item_id, edges, seed, grouped),
        "steps": steps,
    }
    (item_dir / "item.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return item_id


def item_embedding(item_id: str, dim: int = EMBED_DIM) -> np.ndarray:
    digest = hashlib.sha256(f"embed:{item_id}".encode()).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    return rng.standard_normal(dim).astype(np.float32)


def generate_fixture_corpus(out_dir: Path | str, seed: int = 7) -> Path:
    """Write the fixture corpus plus its embedding file; returns the corpus root."""
    out_dir = Path(out_dir)
    corpus_root = out_dir / "corpus"
    corpus_root.mkdir(parents=True, exist_ok=True)

    ids = []
    for index, (category, name, part_count) in enumerate(ITEM_SPECS):
        grouped = index in (0, 7)  # one small, one large item get group notation
        ids.append(generate_item(corpus_root, category, name, part_count, seed, grouped))

    ids_sorted = sorted(ids)
    rows = np.stack([item_embedding(item_id) for item_id in ids_sorted])
    write_embeddings(out_dir / "embeddings.bin", ids_sorted, rows)
    return corpus_root
