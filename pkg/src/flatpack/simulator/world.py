"""Kinematic 2D workspace for pick-and-place assembly episodes.

The robot enjoys perfect localization: motion is straight-line travel at
fixed speed, a fetch always succeeds, and a delivered part snaps to a
deterministic slot on a ring around the assembly point. One tick elapses
per primitive action.
"""

from __future__ import annotations

import colorsys
import hashlib
import math
import random
from dataclasses import dataclass, field

from ..corpus import FurnitureItem
from ..errors import ContractError
from ..partviz.raster import BLACK, RasterImage

WORKSPACE_SIZE = 10.0
WALL_MARGIN = 0.5
MIN_PART_SPACING = 1.0
MIN_ASSEMBLY_CLEARANCE = 1.5
ASSEMBLY_RADIUS = 0.5
RING_RADIUS = 0.3
ROBOT_SPEED = 1.0  # m/s
ROBOT_START = (1.0, 1.0)
PART_SIZE = 0.1  # cube edge, metres

_PLACEMENT_ATTEMPTS = 2000

XY = tuple[float, float]


class WorldSetupError(Exception):
    """Part placement could not satisfy the spacing constraints."""


class InvalidDirectiveError(Exception):
    pass


@dataclass
class PartState:
    position: XY
    color: tuple[float, float, float]  # hue degrees, saturation, value
    label: str
    delivered: bool = False


@dataclass
class RobotState:
    position: XY
    heading: float
    speed: float = ROBOT_SPEED
    carried: int | None = None


@dataclass
class WorldState:
    width: float
    height: float
    robot: RobotState
    parts: dict[int, PartState]
    assembly_point: XY
    tick: int = 0
    delivered_order: list[int] = field(default_factory=list)

    def delivered_count(self) -> int:
        return len(self.delivered_order)

    def to_dict(self) -> dict:
        return {
            "workspace": [self.width, self.height],
            "robot": {
                "position": list(self.robot.position),
                "heading": self.robot.heading,
                "speed": self.robot.speed,
                "carried": self.robot.carried,
            },
            "parts": {
                str(pid): {
                    "position": list(p.position),
                    "color": list(p.color),
                    "label": p.label,
                    "delivered": p.delivered,
                }
                for pid, p in sorted(self.parts.items())
            },
            "assembly_point": list(self.assembly_point),
            "tick": self.tick,
            "delivered_order": list(self.delivered_order),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WorldState":
        return cls(
            width=data["workspace"][0],
            height=data["workspace"][1],
            robot=RobotState(
                position=tuple(data["robot"]["position"]),
                heading=data["robot"]["heading"],
                speed=data["robot"]["speed"],
                carried=data["robot"]["carried"],
            ),
            parts={
                int(pid): PartState(
                    position=tuple(p["position"]),
                    color=tuple(p["color"]),
                    label=p["label"],
                    delivered=p["delivered"],
                )
                for pid, p in data["parts"].items()
            },
            assembly_point=tuple(data["assembly_point"]),
            tick=data["tick"],
            delivered_order=list(data["delivered_order"]),
        )


@dataclass(frozen=True)
class Directive:
    action: str  # "fetch" | "complete"
    part: int | None = None

    def to_dict(self) -> dict:
        return {"action": self.action, "part": self.part}


@dataclass(frozen=True)
class PrimitiveAction:
    kind: str  # navigate_to_part | pick | navigate_to_assembly | place
    part: int
    start: XY
    end: XY
    distance: float
    tick: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "part": self.part,
            "start": list(self.start),
            "end": list(self.end),
            "distance": self.distance,
            "tick": self.tick,
        }


@dataclass
class StepResult:
    world: WorldState
    primitives: list[PrimitiveAction]
    invalid_reason: str | None = None


def _distance(a: XY, b: XY) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def part_hue(index: int, part_count: int) -> float:
    return 360.0 * index / part_count


def init_world(item: FurnitureItem, seed: int) -> WorldState:
    """Seeded world: parts >= 1 m apart, >= 1.5 m clear of the centered assembly point."""
    if item.part_count < 1:
        raise ContractError("part_count must be >= 1")
    digest = hashlib.sha256(f"world:{seed}:{item.id}".encode()).digest()
    rng = random.Random(int.from_bytes(digest[:8], "little"))

    assembly = (WORKSPACE_SIZE / 2, WORKSPACE_SIZE / 2)
    positions: list[XY] = []
    for _ in range(item.part_count):
        for attempt in range(_PLACEMENT_ATTEMPTS):
            candidate = (
                rng.uniform(WALL_MARGIN, WORKSPACE_SIZE - WALL_MARGIN),
                rng.uniform(WALL_MARGIN, WORKSPACE_SIZE - WALL_MARGIN),
            )
            if _distance(candidate, assembly) < MIN_ASSEMBLY_CLEARANCE:
                continue
            if any(_distance(candidate, p) < MIN_PART_SPACING for p in positions):
                continue
            positions.append(candidate)
            break
        else:
            raise WorldSetupError(
                f"could not place {item.part_count} parts with {MIN_PART_SPACING} m spacing"
            )

    parts = {
        i: PartState(
            position=positions[i],
            color=(part_hue(i, item.part_count), 0.8, 0.9),
            label=str(i),
        )
        for i in range(item.part_count)
    }
    return WorldState(
        width=WORKSPACE_SIZE,
        height=WORKSPACE_SIZE,
        robot=RobotState(position=ROBOT_START, heading=0.0),
        parts=parts,
        assembly_point=assembly,
        tick=0,
    )


def ring_slot(world: WorldState, slot_index: int) -> XY:
    angle = 2 * math.pi * slot_index / max(len(world.parts), 1)
    return (
        world.assembly_point[0] + RING_RADIUS * math.cos(angle),
        world.assembly_point[1] + RING_RADIUS * math.sin(angle),
    )


def _move(world: WorldState, kind: str, part: int, target: XY) -> PrimitiveAction:
    start = world.robot.position
    distance = _distance(start, target)
    if distance > 0:
        world.robot.heading = math.atan2(target[1] - start[1], target[0] - start[0])
    world.robot.position = target
    world.tick += 1
    return PrimitiveAction(kind, part, start, target, distance, world.tick)


def _stationary(world: WorldState, kind: str, part: int) -> PrimitiveAction:
    world.tick += 1
    pos = world.robot.position
    return PrimitiveAction(kind, part, pos, pos, 0.0, world.tick)


def step_episode(world: WorldState, directive: Directive) -> StepResult:
    """Apply one directive; a valid fetch expands to exactly four primitives.

    Invalid directives (unknown part, already-delivered part) leave the
    world unchanged and are reported, not raised: the episode goes on and
    the directive still counts against the budget.
    """
    if directive.action == "complete":
        return StepResult(world, [])
    if directive.action != "fetch":
        return StepResult(world, [], invalid_reason=f"unknown action {directive.action!r}")
    part_id = directive.part
    if part_id is None or part_id not in world.parts:
        return StepResult(world, [], invalid_reason=f"part {part_id} out of range")
    part = world.parts[part_id]
    if part.delivered:
        return StepResult(world, [], invalid_reason=f"part {part_id} already delivered")

    primitives = [_move(world, "navigate_to_part", part_id, part.position)]
    world.robot.carried = part_id
    primitives.append(_stationary(world, "pick", part_id))
    primitives.append(_move(world, "navigate_to_assembly", part_id, world.assembly_point))
    slot = ring_slot(world, world.delivered_count())
    part.position = slot
    part.delivered = True
    world.robot.carried = None
    world.delivered_order.append(part_id)
    primitives.append(_stationary(world, "place", part_id))
    return StepResult(world, primitives)


def hsv_to_rgb255(color: tuple[float, float, float]) -> tuple[int, int, int]:
    r, g, b = colorsys.hsv_to_rgb(color[0] / 360.0, color[1], color[2])
    return (round(r * 255), round(g * 255), round(b * 255))


def render_world(world: WorldState, px_per_m: int = 48) -> RasterImage:
    """Top-down frame: colored numbered part squares, assembly ring, robot marker."""
    size = round(WORKSPACE_SIZE * px_per_m)
    image = RasterImage.new(size, size)

    def to_px(p: XY) -> tuple[int, int]:
        return (round(p[0] * px_per_m), round((WORKSPACE_SIZE - p[1]) * px_per_m))

    ax, ay = to_px(world.assembly_point)
    radius = round(ASSEMBLY_RADIUS * px_per_m)
    for degree in range(0, 360, 4):
        image.set_px(
            ax + round(radius * math.cos(math.radians(degree))),
            ay + round(radius * math.sin(math.radians(degree))),
            (160, 160, 160),
        )

    half = max(2, round(PART_SIZE * px_per_m / 2) * 2)
    for pid, part in sorted(world.parts.items()):
        x, y = to_px(part.position)
        image.fill_rect(x - half, y - half, 2 * half, 2 * half, hsv_to_rgb255(part.color))
        image.draw_text(x + half + 2, y - 3, part.label, BLACK)

    rx, ry = to_px(world.robot.position)
    image.fill_rect(rx - 3, ry - 3, 7, 7, (30, 30, 30))
    hx = rx + round(6 * math.cos(world.robot.heading))
    hy = ry - round(6 * math.sin(world.robot.heading))
    image.draw_line(rx, ry, hx, hy, (30, 30, 30))
    if world.robot.carried is not None:
        image.draw_text(rx + 5, ry + 5, f"c:{world.robot.carried}", BLACK)
    return image
