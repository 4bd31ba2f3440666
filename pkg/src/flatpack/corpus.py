"""Furniture corpus model: items, connection sets, loading, statistics.

A corpus root contains one directory per item, each with an ``item.json``
manifest plus the page/overview images it references:

    {
      "id": "Chair_arvika",
      "category": "Chair",
      "name": "arvika",
      "part_count": 4,
      "pages": ["page_0.ppm", "page_1.ppm"],
      "parts_overview": "parts_overview.ppm",
      "connections": [[0, 1], ["0,1", 2]],
      "cover_page": "page_0.ppm",          // optional, defaults to pages[0]
      "steps": [[[0, 1]], [[1, 2]]]        // optional per-step connections
    }

Connection endpoints are part indices; a comma-separated string endpoint
("0,1,2") names a pre-assembled group and expands to all cross pairs
against the other endpoint (never to pairs inside the group itself).
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .errors import ContractError, CorpusError


class Category(str, Enum):
    CHAIR = "Chair"
    TABLE = "Table"
    BENCH = "Bench"
    SHELF = "Shelf"
    DESK = "Desk"
    MISC = "Misc"


class Connection(NamedTuple):
    """An unordered part-index pair, stored with a < b."""

    a: int
    b: int


class SelfLoopError(ValueError):
    """A connection named the same part on both endpoints."""


def normalize_connection(raw_a: int, raw_b: int) -> Connection:
    """Order a raw endpoint pair so the smaller index comes first."""
    if raw_a < 0 or raw_b < 0:
        raise ValueError(f"negative part index in ({raw_a}, {raw_b})")
    if raw_a == raw_b:
        raise SelfLoopError(f"connection ({raw_a}, {raw_b}) is a self-loop")
    return Connection(raw_a, raw_b) if raw_a < raw_b else Connection(raw_b, raw_a)


@dataclass(frozen=True)
class ConnectionSet:
    """A deduplicated set of normalized connections."""

    pairs: frozenset[Connection] = field(default_factory=frozenset)

    @classmethod
    def from_pairs(cls, raw: Iterable[tuple[int, int]]) -> "ConnectionSet":
        return cls(frozenset(normalize_connection(a, b) for a, b in raw))

    @classmethod
    def empty(cls) -> "ConnectionSet":
        return cls(frozenset())

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Connection]:
        return iter(sorted(self.pairs))

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def intersection(self, other: "ConnectionSet") -> "ConnectionSet":
        return ConnectionSet(self.pairs & other.pairs)

    def difference(self, other: "ConnectionSet") -> "ConnectionSet":
        return ConnectionSet(self.pairs - other.pairs)

    def union(self, other: "ConnectionSet") -> "ConnectionSet":
        return ConnectionSet(self.pairs | other.pairs)

    def to_list(self) -> list[list[int]]:
        """Sorted [a, b] pairs, the canonical JSON form."""
        return [[c.a, c.b] for c in self]

    def max_index(self) -> int:
        return max((c.b for c in self.pairs), default=-1)

    def validate_for(self, part_count: int, context: str = "") -> None:
        for c in sorted(self.pairs):
            if c.b >= part_count:
                where = f" in {context}" if context else ""
                raise CorpusError(
                    f"connection ({c.a}, {c.b}){where} out of range for part_count={part_count}"
                )


Endpoint = int | str


def parse_endpoint(raw: Endpoint) -> tuple[int, ...]:
    """An endpoint is a part index or a "i,j,..." group string."""
    if isinstance(raw, bool):
        raise CorpusError(f"unparsable connection endpoint {raw!r}")
    if isinstance(raw, int):
        if raw < 0:
            raise CorpusError(f"negative connection endpoint {raw}")
        return (raw,)
    if isinstance(raw, str):
        members = []
        for token in raw.split(","):
            token = token.strip()
            if not token.isdigit():
                raise CorpusError(f"unparsable connection endpoint {raw!r}")
            members.append(int(token))
        if not members:
            raise CorpusError(f"unparsable connection endpoint {raw!r}")
        return tuple(dict.fromkeys(members))
    raise CorpusError(f"unparsable connection endpoint {raw!r}")


def extract_ground_truth(raw_connections: Iterable[tuple[Endpoint, Endpoint]]) -> ConnectionSet:
    """Expand raw endpoint pairs into a normalized connection set.

    A pair whose endpoints are groups A and B yields every cross pair
    a in A x b in B with a != b. Pairs inside one group are not emitted:
    the group denotes a pre-assembled unit whose internal connections
    appear as their own entries in the data.
    """
    pairs: set[Connection] = set()
    for raw_a, raw_b in raw_connections:
        group_a = parse_endpoint(raw_a)
        group_b = parse_endpoint(raw_b)
        for a in group_a:
            for b in group_b:
                if a != b:
                    pairs.add(normalize_connection(a, b))
    return ConnectionSet(frozenset(pairs))


@dataclass(frozen=True)
class FurnitureItem:
    """One corpus entry; image fields are resolved file paths."""

    id: str
    category: Category
    name: str
    part_count: int
    manual_pages: tuple[Path, ...]
    cover_page: Path
    parts_overview: Path
    ground_truth: ConnectionSet
    assembly_steps: tuple[ConnectionSet, ...] | None = None


@dataclass(frozen=True)
class Corpus:
    items: tuple[FurnitureItem, ...]
    by_category: dict[Category, tuple[str, ...]]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[FurnitureItem]:
        return iter(self.items)

    def __contains__(self, item_id: object) -> bool:
        return any(item.id == item_id for item in self.items)

    def get(self, item_id: str) -> FurnitureItem:
        for item in self.items:
            if item.id == item_id:
                return item
        raise KeyError(item_id)

    def find(self, category: Category, name: str) -> FurnitureItem | None:
        for item in self.items:
            if item.category == category and item.name == name:
                return item
        return None

    def describe(self) -> dict:
        """Plain-data view of the corpus, stable across loads of one root."""
        return {
            "items": [
                {
                    "id": item.id,
                    "category": item.category.value,
                    "name": item.name,
                    "part_count": item.part_count,
                    "pages": [p.name for p in item.manual_pages],
                    "cover_page": item.cover_page.name,
                    "parts_overview": item.parts_overview.name,
                    "connections": item.ground_truth.to_list(),
                    "steps": [s.to_list() for s in item.assembly_steps]
                    if item.assembly_steps is not None
                    else None,
                }
                for item in self.items
            ],
            "by_category": {c.value: list(ids) for c, ids in self.by_category.items()},
        }

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.describe(), sort_keys=True, separators=(",", ":")).encode()


def _require(data: dict, key: str, item_ref: str):
    if key not in data:
        raise CorpusError(f"{item_ref}: item.json missing key {key!r}")
    return data[key]


def _item_from_manifest(item_dir: Path, data: dict) -> FurnitureItem:
    ref = item_dir.name
    item_id = _require(data, "id", ref)
    if not isinstance(item_id, str) or not item_id:
        raise CorpusError(f"{ref}: invalid id {item_id!r}")

    raw_category = _require(data, "category", item_id)
    try:
        category = Category(raw_category)
    except ValueError:
        raise CorpusError(f"{item_id}: unknown category {raw_category!r}") from None

    name = _require(data, "name", item_id)
    part_count = _require(data, "part_count", item_id)
    if not isinstance(part_count, int) or isinstance(part_count, bool) or part_count < 1:
        raise CorpusError(f"{item_id}: part_count must be a positive integer, got {part_count!r}")

    pages = _require(data, "pages", item_id)
    if not isinstance(pages, list) or not pages:
        raise CorpusError(f"{item_id}: pages must be a non-empty list")
    manual_pages = tuple(item_dir / p for p in pages)

    overview = item_dir / _require(data, "parts_overview", item_id)
    cover = item_dir / data["cover_page"] if "cover_page" in data else manual_pages[0]

    raw_connections = _require(data, "connections", item_id)
    try:
        ground_truth = extract_ground_truth(tuple(map(tuple, raw_connections)))
    except (CorpusError, ValueError) as exc:
        raise CorpusError(f"{item_id}: {exc}") from exc
    ground_truth.validate_for(part_count, context=item_id)

    steps = None
    if data.get("steps") is not None:
        steps = []
        for raw_step in data["steps"]:
            step = extract_ground_truth(tuple(map(tuple, raw_step)))
            step.validate_for(part_count, context=f"{item_id} step")
            steps.append(step)
        steps = tuple(steps)

    return FurnitureItem(
        id=item_id,
        category=category,
        name=name,
        part_count=part_count,
        manual_pages=manual_pages,
        cover_page=cover,
        parts_overview=overview,
        ground_truth=ground_truth,
        assembly_steps=steps,
    )


def load_corpus(root: Path | str) -> Corpus:
    """Load every item directory under ``root``, ordered lexicographically by id."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root {root} is not a directory")

    items = []
    for item_dir in sorted(d for d in root.iterdir() if d.is_dir()):
        manifest = item_dir / "item.json"
        if not manifest.is_file():
            raise CorpusError(f"{item_dir.name}: missing item.json")
        try:
            data = json.loads(manifest.read_text())
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{item_dir.name}: invalid item.json ({exc})") from exc
        items.append(_item_from_manifest(item_dir, data))

    items.sort(key=lambda item: item.id)
    seen_ids: set[str] = set()
    seen_keys: set[tuple[Category, str]] = set()
    for item in items:
        if item.id in seen_ids:
            raise CorpusError(f"duplicate item id {item.id!r}")
        key = (item.category, item.name)
        if key in seen_keys:
            raise CorpusError(f"duplicate (category, name) {item.category.value}/{item.name}")
        seen_ids.add(item.id)
        seen_keys.add(key)

    by_category: dict[Category, list[str]] = {}
    for item in items:
        by_category.setdefault(item.category, []).append(item.id)
    return Corpus(
        items=tuple(items),
        by_category={c: tuple(ids) for c, ids in by_category.items()},
    )


@dataclass(frozen=True)
class CategoryStats:
    count: int
    avg_parts: float
    avg_connections: float


@dataclass(frozen=True)
class CorpusStats:
    item_count: int
    total_parts: int
    total_connections: int
    parts_mean: float
    parts_std: float
    parts_min: int
    parts_max: int
    connections_mean: float
    connections_std: float
    connections_min: int
    connections_max: int
    per_category: dict[Category, CategoryStats]

    def to_dict(self) -> dict:
        return {
            "item_count": self.item_count,
            "total_parts": self.total_parts,
            "total_connections": self.total_connections,
            "parts": {
                "mean": self.parts_mean,
                "std": self.parts_std,
                "min": self.parts_min,
                "max": self.parts_max,
            },
            "connections": {
                "mean": self.connections_mean,
                "std": self.connections_std,
                "min": self.connections_min,
                "max": self.connections_max,
            },
            "per_category": {
                c.value: {
                    "count": s.count,
                    "avg_parts": s.avg_parts,
                    "avg_connections": s.avg_connections,
                }
                for c, s in self.per_category.items()
            },
        }


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Dataset statistics; std is the population form (divide by N)."""
    if len(corpus) == 0:
        raise ContractError("compute_stats requires a non-empty corpus")
    parts = [item.part_count for item in corpus]
    conns = [len(item.ground_truth) for item in corpus]

    per_category: dict[Category, CategoryStats] = {}
    groups: dict[Category, list[FurnitureItem]] = {}
    for item in corpus:
        groups.setdefault(item.category, []).append(item)
    # rows ordered by count descending, category name as tie-break
    for category in sorted(groups, key=lambda c: (-len(groups[c]), c.value)):
        members = groups[category]
        per_category[category] = CategoryStats(
            count=len(members),
            avg_parts=statistics.fmean(m.part_count for m in members),
            avg_connections=statistics.fmean(len(m.ground_truth) for m in members),
        )

    return CorpusStats(
        item_count=len(corpus),
        total_parts=sum(parts),
        total_connections=sum(conns),
        parts_mean=statistics.fmean(parts),
        parts_std=statistics.pstdev(parts),
        parts_min=min(parts),
        parts_max=max(parts),
        connections_mean=statistics.fmean(conns),
        connections_std=statistics.pstdev(conns),
        connections_min=min(conns),
        connections_max=max(conns),
        per_category=per_category,
    )


def connected_components(connections: ConnectionSet, part_count: int) -> list[list[int]]:
    """Connected components of the part graph, each sorted, smallest member first."""
    adjacency: dict[int, set[int]] = {i: set() for i in range(part_count)}
    for c in connections:
        adjacency[c.a].add(c.b)
        adjacency[c.b].add(c.a)
    seen: set[int] = set()
    components = []
    for start in range(part_count):
        if start in seen:
            continue
        stack = [start]
        component = []
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            component.append(node)
            stack.extend(adjacency[node] - seen)
        components.append(sorted(component))
    return components


def feasible_order(connections: ConnectionSet, part_count: int) -> list[int]:
    """A delivery order in which each part after the first member of its
    component attaches to an already-delivered neighbor (BFS per component)."""
    adjacency: dict[int, set[int]] = {i: set() for i in range(part_count)}
    for c in connections:
        adjacency[c.a].add(c.b)
        adjacency[c.b].add(c.a)
    order: list[int] = []
    visited: set[int] = set()
    for component in connected_components(connections, part_count):
        queue = [component[0]]
        visited.add(component[0])
        while queue:
            node = queue.pop(0)
            order.append(node)
            for neighbor in sorted(adjacency[node]):
                if neighbor not in visited:
                    visited.add(neighbor)
                    queue.append(neighbor)
    return order
