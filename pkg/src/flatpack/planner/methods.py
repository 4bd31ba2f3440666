"""The five prediction methods, from zero-shot reasoning to the oracle ceiling."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..errors import ContractError


class MethodKind(str, Enum):
    ZERO_SHOT = "zero_shot"
    COVER_PAGE = "cover_page"
    RAG_IMAGES = "rag_images"
    FULL_MANUAL = "full_manual"
    ORACLE = "oracle"


# canonical report row order
METHOD_ORDER = (
    MethodKind.ZERO_SHOT,
    MethodKind.COVER_PAGE,
    MethodKind.RAG_IMAGES,
    MethodKind.FULL_MANUAL,
    MethodKind.ORACLE,
)

DEFAULT_RAG_K = 3


@dataclass(frozen=True)
class PredictionMethod:
    kind: MethodKind
    k: int | None = None

    def __post_init__(self) -> None:
        if self.kind is MethodKind.RAG_IMAGES:
            if self.k is None or self.k < 1:
                raise ContractError("rag_images requires k >= 1")
        elif self.k is not None:
            raise ContractError(f"{self.kind.value} does not take k")

    @classmethod
    def zero_shot(cls) -> "PredictionMethod":
        return cls(MethodKind.ZERO_SHOT)

    @classmethod
    def cover_page(cls) -> "PredictionMethod":
        return cls(MethodKind.COVER_PAGE)

    @classmethod
    def full_manual(cls) -> "PredictionMethod":
        return cls(MethodKind.FULL_MANUAL)

    @classmethod
    def rag_images(cls, k: int = DEFAULT_RAG_K) -> "PredictionMethod":
        return cls(MethodKind.RAG_IMAGES, k=k)

    @classmethod
    def oracle(cls) -> "PredictionMethod":
        return cls(MethodKind.ORACLE)

    @classmethod
    def parse(cls, text: str) -> "PredictionMethod":
        """Parse "zero_shot", "rag_images:3", etc."""
        head, _, tail = text.strip().partition(":")
        kind = MethodKind(head)
        if kind is MethodKind.RAG_IMAGES:
            return cls(kind, k=int(tail) if tail else DEFAULT_RAG_K)
        if tail:
            raise ContractError(f"method {head} does not take a parameter")
        return cls(kind)

    @property
    def key(self) -> str:
        """Filesystem-safe identifier, e.g. "rag_images_k3"."""
        if self.kind is MethodKind.RAG_IMAGES:
            return f"rag_images_k{self.k}"
        return self.kind.value

    @property
    def label(self) -> str:
        """Human-readable report label."""
        return {
            MethodKind.ZERO_SHOT: "Zero-Shot",
            MethodKind.COVER_PAGE: "Cover Page",
            MethodKind.RAG_IMAGES: f"RAG Images (k={self.k})",
            MethodKind.FULL_MANUAL: "Full Manual",
            MethodKind.ORACLE: "Oracle",
        }[self.kind]

    @property
    def needs_bm25(self) -> bool:
        return self.kind in (MethodKind.COVER_PAGE, MethodKind.FULL_MANUAL)

    @property
    def needs_embeddings(self) -> bool:
        return self.kind is MethodKind.RAG_IMAGES

    @property
    def needs_retrieval(self) -> bool:
        return self.needs_bm25 or self.needs_embeddings


def sort_methods(methods: list[PredictionMethod]) -> list[PredictionMethod]:
    """Order methods canonically for reports (k ascending within rag_images)."""
    return sorted(methods, key=lambda m: (METHOD_ORDER.index(m.kind), m.k or 0))
