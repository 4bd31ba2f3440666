"""Closed Retrieve-Reason-Act episodes.

Retrieval happens once, before the loop. Every iteration sends the
provider a scene snapshot (structured JSON always; a rendered top-down
frame for HTTP providers), the retrieved manual material, and the parts
overview, then executes the parsed directive. Episodes end on a complete
directive, budget exhaustion, a run of invalid directives, or provider
failure.
"""

from __future__ import annotations

import json
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import ConnectionSet, Corpus, FurnitureItem, connected_components
from ..errors import ContractError
from ..partviz.raster import RasterImage
from ..planner.methods import PredictionMethod
from ..planner.parsing import ParseTier, extract_json_object
from ..planner.prompts import PromptBundle, method_images
from ..planner.providers import HttpProvider, ProviderError, ProviderSpec, build_provider
from ..planner.templates import DIRECTIVE_SYSTEM, ITEM_SECTION, SCENE_SECTION
from ..retrieval import RetrievalResult
from .world import (
    Directive,
    PrimitiveAction,
    StepResult,
    WorldState,
    init_world,
    render_world,
    step_episode,
)

INVALID_STREAK_LIMIT = 3


@dataclass(frozen=True)
class Outcome:
    kind: str  # success | partial | failure
    delivered: int
    reason: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "delivered": self.delivered, "reason": self.reason}


@dataclass(frozen=True)
class SceneSnapshot:
    """Structured and (optionally) rendered views of one world tick."""

    tick: int
    structured: dict
    rendered: RasterImage | None = None


def capture_snapshot(world: WorldState, render: bool = False) -> SceneSnapshot:
    return SceneSnapshot(
        tick=world.tick,
        structured=world.to_dict(),
        rendered=render_world(world) if render else None,
    )


@dataclass
class EpisodeLog:
    item_id: str
    seed: int
    method: str
    budget: int
    directives: list[dict] = field(default_factory=list)
    primitives: list[PrimitiveAction] = field(default_factory=list)
    snapshots: list[dict] = field(default_factory=list)
    end_reason: str = ""
    error_detail: str | None = None
    outcome: Outcome | None = None

    def delivered_order(self) -> list[int]:
        return list(self.snapshots[-1]["delivered_order"]) if self.snapshots else []

    def to_jsonl(self) -> str:
        records: list[dict] = [
            {
                "type": "meta",
                "item": self.item_id,
                "seed": self.seed,
                "method": self.method,
                "budget": self.budget,
            }
        ]
        records += [{"type": "snapshot", **snap} for snap in self.snapshots]
        records += [{"type": "directive", **d} for d in self.directives]
        records += [{"type": "primitive", **p.to_dict()} for p in self.primitives]
        records.append(
            {
                "type": "outcome",
                "end_reason": self.end_reason,
                "error_detail": self.error_detail,
                **(self.outcome.to_dict() if self.outcome else {}),
            }
        )
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


_FETCH = re.compile(r"\bfetch\b\D{0,20}?(\d+)", re.IGNORECASE)
_COMPLETE = re.compile(r"\bcomplete\b", re.IGNORECASE)


def parse_directive(raw: str) -> Directive | None:
    """Tiered parse of a directive reply; None when nothing usable is found."""
    obj, tier = extract_json_object(raw, "action", str)
    if tier is not ParseTier.FAILED and obj is not None:
        action = obj["action"].strip().lower()
        if action == "complete":
            return Directive("complete")
        if action == "fetch":
            part = obj.get("part")
            if isinstance(part, int) and not isinstance(part, bool):
                return Directive("fetch", part)
            return None
    fetch = _FETCH.search(raw)
    if fetch:
        return Directive("fetch", int(fetch.group(1)))
    if _COMPLETE.search(raw):
        return Directive("complete")
    return None


def build_directive_bundle(
    item: FurnitureItem,
    scene: SceneSnapshot,
    manual_images: tuple[tuple[str, Path], ...],
    scene_image: Path | None,
) -> PromptBundle:
    scene_json = json.dumps(scene.structured, sort_keys=True)
    sections = (
        (
            "item",
            ITEM_SECTION.format(
                category=item.category.value, name=item.name, part_count=item.part_count
            ),
        ),
        ("scene", SCENE_SECTION.format(tick=scene.tick, scene_json=scene_json)),
    )
    images: tuple[tuple[str, Path], ...] = (("parts overview", item.parts_overview),)
    images += manual_images
    if scene_image is not None:
        images += (("scene view", scene_image),)
    return PromptBundle(system_text=DIRECTIVE_SYSTEM, user_sections=sections, images=images)


def run_rra_loop(
    item: FurnitureItem,
    provider,
    method: PredictionMethod,
    budget: int,
    corpus: Corpus,
    *,
    retrieved: RetrievalResult | None = None,
    seed: int = 0,
    frames_dir: Path | str | None = None,
    invalid_limit: int = INVALID_STREAK_LIMIT,
) -> EpisodeLog:
    """Run one episode and classify its outcome.

    ``retrieved`` carries the one-time retrieval for the chosen method
    (resolved by the caller exactly as for prediction prompts); methods
    that retrieve nothing pass None.
    """
    if budget < 1:
        raise ContractError("budget must be >= 1")
    if isinstance(provider, ProviderSpec):
        provider = build_provider(provider)

    manual_images = method_images(item, method, retrieved, corpus)
    world = init_world(item, seed)
    log = EpisodeLog(item_id=item.id, seed=seed, method=method.key, budget=budget)
    log.snapshots.append(world.to_dict())

    frames_path = Path(frames_dir) if frames_dir else None
    if frames_path:
        frames_path.mkdir(parents=True, exist_ok=True)
    temp_dir: tempfile.TemporaryDirectory | None = None
    attach_scene = isinstance(provider, HttpProvider)
    if attach_scene and frames_path is None:
        temp_dir = tempfile.TemporaryDirectory(prefix="flatpack-scene-")

    try:
        invalid_streak = 0
        for _ in range(budget):
            snapshot = capture_snapshot(world, render=bool(frames_path or attach_scene))
            scene_image = None
            if snapshot.rendered is not None:
                frame_root = frames_path if frames_path else Path(temp_dir.name)
                scene_image = frame_root / f"frame_{snapshot.tick:05d}.ppm"
                scene_image.write_bytes(snapshot.rendered.to_ppm_bytes())

            bundle = build_directive_bundle(
                item, snapshot, manual_images, scene_image if attach_scene else None
            )
            try:
                raw = provider.complete(bundle, item)
            except ProviderError as exc:
                log.end_reason = "provider"
                log.error_detail = str(exc)
                log.outcome = classify_outcome(log, item)
                return log

            directive = parse_directive(raw)
            entry = {
                "tick": world.tick,
                "action": directive.action if directive else None,
                "part": directive.part if directive else None,
                "valid": directive is not None,
                "reason": None if directive else "unparsable",
                "prompt_sections": len(bundle.user_sections),
                "prompt_images": len(bundle.images),
                "prompt_chars": len(bundle.system_text) + len(bundle.user_text()),
            }
            if directive is None:
                invalid_streak += 1
                log.directives.append(entry)
                if invalid_streak >= invalid_limit:
                    log.end_reason = "invalid_streak"
                    break
                continue

            if directive.action == "complete":
                log.directives.append(entry)
                log.end_reason = "complete"
                break

            result: StepResult = step_episode(world, directive)
            if result.invalid_reason is not None:
                invalid_streak += 1
                entry["valid"] = False
                entry["reason"] = result.invalid_reason
                log.directives.append(entry)
                if invalid_streak >= invalid_limit:
                    log.end_reason = "invalid_streak"
                    break
                continue

            invalid_streak = 0
            log.directives.append(entry)
            log.primitives.extend(result.primitives)
            log.snapshots.append(world.to_dict())
        else:
            log.end_reason = "budget"
        if frames_path:  # final state frame
            closing = capture_snapshot(world, render=True)
            (frames_path / f"frame_{closing.tick:05d}.ppm").write_bytes(
                closing.rendered.to_ppm_bytes()
            )
    finally:
        if temp_dir is not None:
            temp_dir.cleanup()

    log.outcome = classify_outcome(log, item)
    return log


def prefix_connected(order: list[int], connections: ConnectionSet, part_count: int) -> bool:
    """True when, inside every connected component, each delivered part after
    the component's first shares a connection with an earlier delivery."""
    adjacency: dict[int, set[int]] = {i: set() for i in range(part_count)}
    for c in connections:
        adjacency[c.a].add(c.b)
        adjacency[c.b].add(c.a)
    component_of: dict[int, int] = {}
    for index, component in enumerate(connected_components(connections, part_count)):
        for member in component:
            component_of[member] = index

    started: set[int] = set()
    seen: set[int] = set()
    for part in order:
        component = component_of[part]
        if component in started and not (adjacency[part] & seen):
            return False
        started.add(component)
        seen.add(part)
    return True


def classify_outcome(log: EpisodeLog, item: FurnitureItem) -> Outcome:
    """Success needs every part delivered in a connectivity-preserving order."""
    order = log.delivered_order()
    delivered = len(order)
    if delivered == 0:
        reason = "provider" if log.end_reason == "provider" else "no progress"
        return Outcome("failure", 0, reason)
    if delivered == item.part_count and prefix_connected(order, item.ground_truth, item.part_count):
        return Outcome("success", delivered)
    return Outcome("partial", delivered, log.end_reason or None)
