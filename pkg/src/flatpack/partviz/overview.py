"""Labeled parts-overview rendering.

Each mesh is orthographically projected along the fixed view direction
(1,1,1)/sqrt(3) (up-hint +z), scaled to fit its grid cell with a 10%
margin, and drawn as an edge wireframe with its label beneath. Output is
deterministic: same meshes and labels give identical bytes.
"""

from __future__ import annotations

import math

from ..errors import ContractError
from .mesh import Mesh, Vec3
from .raster import BLACK, GLYPH_H, RasterImage, text_width

_S3 = math.sqrt(3.0)
_VIEW: Vec3 = (1.0 / _S3, 1.0 / _S3, 1.0 / _S3)
_UP_HINT: Vec3 = (0.0, 0.0, 1.0)

LABEL_STRIP_PX = GLYPH_H + 4
FIT_FRACTION = 0.8  # 10% margin on each side


def _cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _normalize(v: Vec3) -> Vec3:
    norm = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    return (v[0] / norm, v[1] / norm, v[2] / norm)


_RIGHT = _normalize(_cross(_UP_HINT, _VIEW))
_UP = _cross(_VIEW, _RIGHT)


def project_point(p: Vec3) -> tuple[float, float]:
    """Image-plane coordinates of a point: its components orthogonal to the view axis."""
    return (
        p[0] * _RIGHT[0] + p[1] * _RIGHT[1] + p[2] * _RIGHT[2],
        p[0] * _UP[0] + p[1] * _UP[1] + p[2] * _UP[2],
    )


def grid_shape(n: int) -> tuple[int, int]:
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    return cols, rows


def _cell_pixels(mesh: Mesh, cell_px: int) -> list[tuple[float, float]] | None:
    """Projected vertices mapped into cell-local pixel coordinates."""
    if not mesh.vertices:
        return None
    projected = [project_point(v) for v in mesh.vertices]
    xs = [p[0] for p in projected]
    ys = [p[1] for p in projected]
    span = max(max(xs) - min(xs), max(ys) - min(ys))
    scale = FIT_FRACTION * cell_px / span if span > 0 else 0.0
    cx = (max(xs) + min(xs)) / 2
    cy = (max(ys) + min(ys)) / 2
    half = cell_px / 2
    # image y grows downward
    return [((x - cx) * scale + half, half - (y - cy) * scale) for x, y in projected]


def render_parts_overview(meshes: list[Mesh], labels: list[str], cell_px: int) -> RasterImage:
    if len(meshes) != len(labels) or not meshes:
        raise ContractError("meshes and labels must be equally long and non-empty")
    if cell_px < 8:
        raise ContractError("cell_px too small")

    cols, rows = grid_shape(len(meshes))
    cell_h = cell_px + LABEL_STRIP_PX
    image = RasterImage.new(cols * cell_px, rows * cell_h)

    for index, (mesh, label) in enumerate(zip(meshes, labels)):
        ox = (index % cols) * cell_px
        oy = (index // cols) * cell_h
        points = _cell_pixels(mesh, cell_px)
        if points is not None:
            if mesh.faces:
                for a, b in mesh.edges():
                    x0, y0 = points[a]
                    x1, y1 = points[b]
                    image.draw_line(
                        ox + round(x0), oy + round(y0), ox + round(x1), oy + round(y1), BLACK
                    )
            else:
                for x, y in points:
                    image.set_px(ox + round(x), oy + round(y), BLACK)
        tx = ox + max(0, (cell_px - text_width(label)) // 2)
        image.draw_text(tx, oy + cell_px + 2, label)
    return image
