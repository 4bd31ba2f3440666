"""Kinematic workspace and the closed Retrieve-Reason-Act loop."""

from .episode import (
    INVALID_STREAK_LIMIT,
    EpisodeLog,
    Outcome,
    SceneSnapshot,
    build_directive_bundle,
    capture_snapshot,
    classify_outcome,
    parse_directive,
    prefix_connected,
    run_rra_loop,
)
from .world import (
    Directive,
    PartState,
    PrimitiveAction,
    RobotState,
    StepResult,
    WorldSetupError,
    WorldState,
    init_world,
    part_hue,
    render_world,
    ring_slot,
    step_episode,
)

__all__ = [
    "INVALID_STREAK_LIMIT",
    "Directive",
    "EpisodeLog",
    "Outcome",
    "SceneSnapshot",
    "capture_snapshot",
    "PartState",
    "PrimitiveAction",
    "RobotState",
    "StepResult",
    "WorldSetupError",
    "WorldState",
    "build_directive_bundle",
    "classify_outcome",
    "init_world",
    "parse_directive",
    "part_hue",
    "prefix_connected",
    "render_world",
    "ring_slot",
    "run_rra_loop",
    "step_episode",
]
