"""Provider-neutral prompt bundles for each prediction method.

A bundle is a pure function of its inputs: ordered text sections plus
ordered image attachments (parts overview first, then retrieved material
in retrieval order), with deterministic decode parameters.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import Corpus, FurnitureItem
from ..errors import ContractError
from ..retrieval import RetrievalResult
from . import templates
from .methods import MethodKind, PredictionMethod
from .parsing import format_connections


@dataclass(frozen=True)
class DecodeParams:
    temperature: float = 0.0
    max_tokens: int = 4096
    top_p: float = 1.0


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_sections: tuple[tuple[str, str], ...]
    images: tuple[tuple[str, Path], ...]
    decode_params: DecodeParams = field(default_factory=DecodeParams)

    def section(self, label: str) -> str | None:
        for name, text in self.user_sections:
            if name == label:
                return text
        return None

    def user_text(self) -> str:
        return "\n\n".join(text for _, text in self.user_sections)


def bundle_digest(bundle: PromptBundle) -> str:
    """Content hash of the canonical bundle serialization.

    Image attachments contribute their byte digests, so the key is stable
    across machines and path layouts.
    """
    canonical = {
        "version": templates.PROMPT_VERSION,
        "system_text": bundle.system_text,
        "user_sections": [list(s) for s in bundle.user_sections],
        "images": [
            [caption, hashlib.sha256(Path(path).read_bytes()).hexdigest()]
            for caption, path in bundle.images
        ],
        "decode_params": [
            bundle.decode_params.temperature,
            bundle.decode_params.max_tokens,
            bundle.decode_params.top_p,
        ],
    }
    payload = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _item_section(item: FurnitureItem) -> tuple[str, str]:
    return (
        "item",
        templates.ITEM_SECTION.format(
            category=item.category.value, name=item.name, part_count=item.part_count
        ),
    )


def method_images(
    item: FurnitureItem,
    method: PredictionMethod,
    retrieved: RetrievalResult | None,
    corpus: Corpus,
) -> tuple[tuple[str, Path], ...]:
    """The retrieved material a method attaches after the parts overview.

    Cover-page and full-manual methods require a retrieval result whose
    top hit is the item itself; the example-based method attaches each
    retrieved item's full manual in retrieval order.
    """
    if method.needs_retrieval and (retrieved is None or not retrieved):
        raise ContractError(f"method {method.key} requires a retrieval result")

    if method.kind is MethodKind.COVER_PAGE:
        if retrieved.top() != item.id:
            raise ContractError(f"retrieval did not resolve target {item.id} (got {retrieved.top()})")
        return (("target cover page", item.cover_page),)

    if method.kind is MethodKind.FULL_MANUAL:
        if retrieved.top() != item.id:
            raise ContractError(f"retrieval did not resolve target {item.id} (got {retrieved.top()})")
        total = len(item.manual_pages)
        return tuple(
            (f"target manual page {page_no}/{total}", page)
            for page_no, page in enumerate(item.manual_pages, start=1)
        )

    if method.kind is MethodKind.RAG_IMAGES:
        if item.id in retrieved.ids():
            raise ContractError(f"retrieved examples include the target {item.id}")
        images: list[tuple[str, Path]] = []
        for i, example_id in enumerate(retrieved.ids(), start=1):
            example = corpus.get(example_id)
            total = len(example.manual_pages)
            images += [
                (f"example {i} ({example.id}) manual page {page_no}/{total}", page)
                for page_no, page in enumerate(example.manual_pages, start=1)
            ]
        return tuple(images)

    return ()


def build_prompt(
    item: FurnitureItem,
    method: PredictionMethod,
    retrieved: RetrievalResult | None,
    corpus: Corpus,
) -> PromptBundle:
    """Assemble the method-specific bundle for one item.

    Every method includes the item's category, name, parts count, and the
    parts-overview image first; retrieved material follows in retrieval
    order. The oracle method instead embeds the ground truth in the output
    schema.
    """
    attachments = method_images(item, method, retrieved, corpus)
    sections: list[tuple[str, str]] = [_item_section(item)]

    if method.kind is MethodKind.ZERO_SHOT:
        sections.append(("guidance", templates.ZERO_SHOT_NOTE))
    elif method.kind is MethodKind.COVER_PAGE:
        sections.append(("guidance", templates.COVER_PAGE_NOTE))
    elif method.kind is MethodKind.FULL_MANUAL:
        sections.append(
            ("guidance", templates.FULL_MANUAL_NOTE.format(page_count=len(item.manual_pages)))
        )
    elif method.kind is MethodKind.RAG_IMAGES:
        listing = "\n".join(
            f"- example {i}: {corpus.get(eid).id} ({corpus.get(eid).part_count} parts)"
            for i, eid in enumerate(retrieved.ids(), start=1)
        )
        sections.append(
            (
                "examples",
                templates.EXAMPLES_NOTE.format(
                    count=len(retrieved), category=item.category.value, listing=listing
                ),
            )
        )
    elif method.kind is MethodKind.ORACLE:
        sections.append(
            (
                "ground_truth",
                templates.ORACLE_NOTE.format(
                    ground_truth_json=format_connections(item.ground_truth)
                ),
            )
        )

    return PromptBundle(
        system_text=templates.PREDICTION_SYSTEM,
        user_sections=tuple(sections),
        images=(("parts overview", item.parts_overview),) + attachments,
    )
