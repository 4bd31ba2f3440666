"""Part geometry: OBJ parsing and labeled wireframe overview rendering."""

from .mesh import Mesh, ObjParseError, parse_obj, serialize_obj
from .overview import project_point, render_parts_overview
from .raster import RasterImage, read_ppm, write_ppm

__all__ = [
    "Mesh",
    "ObjParseError",
    "RasterImage",
    "parse_obj",
    "project_point",
    "read_ppm",
    "render_parts_overview",
    "serialize_obj",
    "write_ppm",
]
