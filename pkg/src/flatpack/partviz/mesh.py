"""Minimal Wavefront OBJ mesh model.

Only ``v`` and ``f`` records are honored; ``vt``/``vn``/``o``/``g``/
``usemtl``/``s``/``mtllib`` and comments are skipped. Polygon faces are
fan-triangulated, OBJ's 1-based indices become 0-based, and negative
indices resolve against the vertices seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ObjParseError(ValueError):
    """OBJ text that cannot be interpreted; message carries the line number."""


Vec3 = tuple[float, float, float]


@dataclass
class Mesh:
    vertices: list[Vec3] = field(default_factory=list)
    faces: list[tuple[int, int, int]] = field(default_factory=list)

    def edges(self) -> list[tuple[int, int]]:
        """Unique undirected edges of the triangle set, sorted."""
        seen: set[tuple[int, int]] = set()
        for a, b, c in self.faces:
            for u, v in ((a, b), (b, c), (a, c)):
                seen.add((u, v) if u < v else (v, u))
        return sorted(seen)


_IGNORED = {"vt", "vn", "vp", "o", "g", "s", "usemtl", "mtllib", "l", "p"}


def _resolve_index(token: str, vertex_count: int, lineno: int) -> int:
    head = token.split("/")[0]
    try:
        raw = int(head)
    except ValueError:
        raise ObjParseError(f"line {lineno}: bad face index {token!r}") from None
    if raw == 0:
        raise ObjParseError(f"line {lineno}: face index 0 is not valid in OBJ")
    index = vertex_count + raw if raw < 0 else raw - 1
    if not 0 <= index < vertex_count:
        raise ObjParseError(f"line {lineno}: face index {raw} out of range (have {vertex_count} vertices)")
    return index


def parse_obj(text: str) -> Mesh:
    mesh = Mesh()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        record, *fields = stripped.split()
        if record == "v":
            if len(fields) < 3:
                raise ObjParseError(f"line {lineno}: vertex needs 3 coordinates")
            try:
                x, y, z = (float(v) for v in fields[:3])
            except ValueError:
                raise ObjParseError(f"line {lineno}: bad vertex coordinate") from None
            mesh.vertices.append((x, y, z))
        elif record == "f":
            if len(fields) < 3:
                raise ObjParseError(f"line {lineno}: face needs at least 3 vertices")
            indices = [_resolve_index(t, len(mesh.vertices), lineno) for t in fields]
            for j in range(1, len(indices) - 1):
                mesh.faces.append((indices[0], indices[j], indices[j + 1]))
        elif record in _IGNORED:
            continue
        # unknown records are skipped
    return mesh


def serialize_obj(mesh: Mesh) -> str:
    lines = [f"v {x:g} {y:g} {z:g}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    return "\n".join(lines) + ("\n" if lines else "")
