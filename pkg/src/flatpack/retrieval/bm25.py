"""Okapi BM25 over item identity strings.

Each item is indexed as the lowercased concatenation of its category and
name, tokenized on non-alphanumeric boundaries. The idf uses the Okapi
form ln((N - df + 0.5)/(df + 0.5) + 1), which keeps scores non-negative.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from ..corpus import Corpus
from .ranking import RetrievalResult

_TOKEN = re.compile(r"[a-z0-9]+")

DEFAULT_K1 = 1.5
DEFAULT_B = 0.75


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass
class Bm25Index:
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    avg_doc_length: float = 0.0

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    def idf(self, token: str) -> float:
        df = len(self.postings.get(token, ()))
        n = self.doc_count
        return math.log((n - df + 0.5) / (df + 0.5) + 1.0)

    def to_dict(self) -> dict:
        return {
            "k1": self.k1,
            "b": self.b,
            "postings": {t: [[d, tf] for d, tf in ps] for t, ps in sorted(self.postings.items())},
            "doc_lengths": dict(sorted(self.doc_lengths.items())),
            "avg_doc_length": self.avg_doc_length,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Bm25Index":
        return cls(
            k1=data["k1"],
            b=data["b"],
            postings={t: [(d, tf) for d, tf in ps] for t, ps in data["postings"].items()},
            doc_lengths=data["doc_lengths"],
            avg_doc_length=data["avg_doc_length"],
        )


def build_bm25(corpus: Corpus, k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> Bm25Index:
    if k1 <= 0 or not 0 <= b <= 1:
        raise ValueError(f"BM25 parameters out of range: k1={k1}, b={b}")
    index = Bm25Index(k1=k1, b=b)
    for item in corpus:
        tokens = tokenize(f"{item.category.value} {item.name}")
        index.doc_lengths[item.id] = len(tokens)
        counts: dict[str, int] = {}
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
        for token, tf in counts.items():
            index.postings.setdefault(token, []).append((item.id, tf))
    total = sum(index.doc_lengths.values())
    index.avg_doc_length = total / len(index.doc_lengths) if index.doc_lengths else 0.0
    return index


def bm25_query(index: Bm25Index, query: str, top_k: int) -> RetrievalResult:
    """Top documents by BM25 score; ties broken by lexicographic doc id."""
    scores: dict[str, float] = {}
    for token in tokenize(query):
        postings = index.postings.get(token)
        if not postings:
            continue
        idf = index.idf(token)
        for doc_id, tf in postings:
            dl = index.doc_lengths[doc_id]
            denom = tf + index.k1 * (1.0 - index.b + index.b * dl / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (index.k1 + 1.0) / denom
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return RetrievalResult(tuple(ranked))
