"""Shared ranked-result container."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked (item id, score) pairs; best first, no duplicate ids."""

    ranked: tuple[tuple[str, float], ...]

    def ids(self) -> list[str]:
        return [item_id for item_id, _ in self.ranked]

    def __len__(self) -> int:
        return len(self.ranked)

    def __bool__(self) -> bool:
        return bool(self.ranked)

    def top(self) -> str | None:
        return self.ranked[0][0] if self.ranked else None
