"""flatpack: retrieval-augmented assembly planning over visual furniture manuals."""

from .corpus import (
    Category,
    Connection,
    ConnectionSet,
    Corpus,
    CorpusStats,
    FurnitureItem,
    compute_stats,
    extract_ground_truth,
    load_corpus,
    normalize_connection,
)
from .errors import ContractError, CorpusError
from .metrics import AggregateReport, ItemMetrics, aggregate, error_breakdown, score_item

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "Category",
    "Connection",
    "ConnectionSet",
    "ContractError",
    "Corpus",
    "CorpusError",
    "CorpusStats",
    "FurnitureItem",
    "ItemMetrics",
    "__version__",
    "aggregate",
    "compute_stats",
    "error_breakdown",
    "extract_ground_truth",
    "load_corpus",
    "normalize_connection",
    "score_item",
]
