"""coverembed: offline image/text encoder emitting RAREMB1 vector files."""

from .backends import DIM, BackendUnavailableError, HashBackend, load_backend
from .writer import MAGIC, manifest_path_for, write_vectors

__version__ = "0.1.0"

__all__ = [
    "DIM",
    "MAGIC",
    "BackendUnavailableError",
    "HashBackend",
    "__version__",
    "load_backend",
    "manifest_path_for",
    "write_vectors",
]
