from __future__ import annotations

import json
from pathlib import Path

import pytest

from flatpack.corpus import Category, ConnectionSet, Corpus, FurnitureItem, load_corpus

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES_DIR = REPO_ROOT / "fixtures"
FIXTURE_CORPUS_ROOT = FIXTURES_DIR / "corpus"
FIXTURE_EMBEDDINGS = FIXTURES_DIR / "embeddings.bin"

TINY_PPM = b"P6\n1 1\n255\n\xff\xff\xff"


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    return load_corpus(FIXTURE_CORPUS_ROOT)


def write_item_dir(
    root: Path,
    item_id: str,
    category: str,
    name: str,
    part_count: int,
    connections,
    pages: int = 2,
    steps=None,
) -> Path:
    """Write a minimal item directory with stub page images."""
    item_dir = root / item_id
    item_dir.mkdir(parents=True)
    page_names = [f"page_{i}.ppm" for i in range(pages)]
    for page in page_names:
        (item_dir / page).write_bytes(TINY_PPM)
    (item_dir / "parts_overview.ppm").write_bytes(TINY_PPM)
    manifest = {
        "id": item_id,
        "category": category,
        "name": name,
        "part_count": part_count,
        "pages": page_names,
        "parts_overview": "parts_overview.ppm",
        "connections": connections,
    }
    if steps is not None:
        manifest["steps"] = steps
    (item_dir / "item.json").write_text(json.dumps(manifest))
    return item_dir


def fabricate_item(
    item_id: str = "Chair_test",
    category: Category = Category.CHAIR,
    part_count: int = 4,
    connections=((0, 1), (1, 2), (2, 3)),
    pages: tuple[Path, ...] = (Path("/nonexistent/page_0.ppm"),),
    overview: Path = Path("/nonexistent/parts_overview.ppm"),
) -> FurnitureItem:
    """In-memory item for tests that never touch image bytes."""
    name = item_id.split("_", 1)[1] if "_" in item_id else item_id
    return FurnitureItem(
        id=item_id,
        category=category,
        name=name,
        part_count=part_count,
        manual_pages=tuple(pages),
        cover_page=pages[0],
        parts_overview=overview,
        ground_truth=ConnectionSet.from_pairs(connections),
        assembly_steps=None,
    )


def fabricate_corpus(items: list[FurnitureItem]) -> Corpus:
    items = sorted(items, key=lambda i: i.id)
    by_category: dict[Category, list[str]] = {}
    for item in items:
        by_category.setdefault(item.category, []).append(item.id)
    return Corpus(items=tuple(items), by_category={c: tuple(v) for c, v in by_category.items()})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        label = item.name.removeprefix("test_")
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"\nACCEPTANCE {label}: {status}")
