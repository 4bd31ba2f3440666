"""Document retrieval (BM25 over category+name) and example retrieval (flat L2)."""

from .bm25 import Bm25Index, bm25_query, build_bm25, tokenize
from .embeddings import (
    MAGIC,
    EmbeddingFormatError,
    EmbeddingMatrix,
    default_manifest_path,
    load_embeddings,
    retrieve_similar,
    write_embeddings,
)
from .ranking import RetrievalResult

__all__ = [
    "MAGIC",
    "Bm25Index",
    "EmbeddingFormatError",
    "EmbeddingMatrix",
    "RetrievalResult",
    "bm25_query",
    "build_bm25",
    "default_manifest_path",
    "load_embeddings",
    "retrieve_similar",
    "tokenize",
    "write_embeddings",
]
