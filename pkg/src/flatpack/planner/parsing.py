"""Tiered recovery of structured predictions from raw model text.

Tiers are tried in order: the whole text as JSON, the first fenced code
block, the first balanced JSON object embedding the required key, then a
regex scan. Whatever survives is filtered against the item's part count,
so a parsed set can never violate connection-set invariants.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum

from ..corpus import ConnectionSet, normalize_connection
from ..errors import ContractError


class ParseTier(str, Enum):
    STRICT = "strict"
    FENCED = "fenced"
    EMBEDDED = "embedded"
    REGEX = "regex"
    FAILED = "failed"


@dataclass(frozen=True)
class PredictionOutcome:
    raw_text: str
    parsed: ConnectionSet
    parse_tier: ParseTier
    rejected: tuple[tuple[tuple[int, int], str], ...] = ()


_FENCE = re.compile(r"```[a-zA-Z]*\s*\n(.*?)```", re.DOTALL)
_PAIR = re.compile(
    r"[\"']?part1[\"']?\s*[:=]\s*(-?\d+)\s*,\s*[\"']?part2[\"']?\s*[:=]\s*(-?\d+)",
    re.IGNORECASE,
)


def format_connections(connections: ConnectionSet) -> str:
    """Serialize a connection set in the output schema used by providers."""
    return json.dumps(
        {"connections": [{"part1": c.a, "part2": c.b} for c in connections]},
        separators=(", ", ": "),
    )


def _accepts(obj, key: str, value_type: type) -> bool:
    return isinstance(obj, dict) and isinstance(obj.get(key), value_type)


def _loads_object(text: str, key: str, value_type: type) -> dict | None:
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, RecursionError):
        return None
    return obj if _accepts(obj, key, value_type) else None


def _embedded_object(raw: str, key: str, value_type: type) -> dict | None:
    decoder = json.JSONDecoder()
    search = 0
    while True:
        start = raw.find("{", search)
        if start < 0:
            return None
        try:
            obj, _ = decoder.raw_decode(raw, start)
        except (json.JSONDecodeError, RecursionError):
            search = start + 1
            continue
        if _accepts(obj, key, value_type):
            return obj
        search = start + 1


def extract_json_object(raw: str, key: str, value_type: type = list) -> tuple[dict | None, ParseTier]:
    """First JSON object whose ``key`` holds a ``value_type``, plus the tier that found it."""
    obj = _loads_object(raw.strip(), key, value_type)
    if obj is not None:
        return obj, ParseTier.STRICT
    for block in _FENCE.findall(raw):
        obj = _loads_object(block.strip(), key, value_type)
        if obj is not None:
            return obj, ParseTier.FENCED
    obj = _embedded_object(raw, key, value_type)
    if obj is not None:
        return obj, ParseTier.EMBEDDED
    return None, ParseTier.FAILED


def _raw_pairs_from_entries(entries) -> tuple[list[tuple[int, int]], list[tuple[tuple[int, int], str]]]:
    pairs: list[tuple[int, int]] = []
    rejected: list[tuple[tuple[int, int], str]] = []

    def as_index(value) -> int | None:
        if isinstance(value, bool) or not isinstance(value, int):
            return None
        return value

    for entry in entries:
        if isinstance(entry, dict):
            a, b = as_index(entry.get("part1")), as_index(entry.get("part2"))
        elif isinstance(entry, (list, tuple)) and len(entry) == 2:
            a, b = as_index(entry[0]), as_index(entry[1])
        else:
            a = b = None
        if a is None or b is None:
            rejected.append(((-1, -1), "malformed"))
        else:
            pairs.append((a, b))
    return pairs, rejected


def parse_prediction(raw: str, part_count: int) -> PredictionOutcome:
    if part_count < 1:
        raise ContractError("part_count must be >= 1")

    rejected: list[tuple[tuple[int, int], str]] = []
    obj, tier = extract_json_object(raw, "connections", list)
    if obj is not None:
        raw_pairs, rejected = _raw_pairs_from_entries(obj["connections"])
    else:
        matches = _PAIR.findall(raw)
        if matches:
            tier = ParseTier.REGEX
            raw_pairs = [(int(a), int(b)) for a, b in matches]
        else:
            return PredictionOutcome(raw, ConnectionSet.empty(), ParseTier.FAILED)

    accepted: set = set()
    for a, b in raw_pairs:
        if a == b:
            rejected.append(((a, b), "self-loop"))
        elif not (0 <= a < part_count and 0 <= b < part_count):
            rejected.append(((a, b), "out-of-range"))
        else:
            accepted.add(normalize_connection(a, b))
    return PredictionOutcome(raw, ConnectionSet(frozenset(accepted)), tier, tuple(rejected))
