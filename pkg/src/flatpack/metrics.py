"""Connection-set scoring and corpus-level aggregation.

Scoring is set-intersection counting, so assembly order never matters.
Empty-set conventions keep the pipeline total: an empty prediction
against non-empty ground truth scores zero precision (not undefined),
and two empty sets count as an exact match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import Category, ConnectionSet, FurnitureItem
from .errors import ContractError

PARTS_BUCKETS: tuple[tuple[str, int, int | None], ...] = (
    ("1-5", 1, 5),
    ("6-10", 6, 10),
    ("11-15", 11, 15),
    ("16+", 16, None),
)


@dataclass(frozen=True)
class ItemMetrics:
    precision: float
    recall: float
    f1: float
    exact: bool
    tp: int
    fp: int
    fn: int


def score_item(pred: ConnectionSet, gt: ConnectionSet) -> ItemMetrics:
    tp = len(pred.intersection(gt))
    fp = len(pred) - tp
    fn = len(gt) - tp

    if len(pred) == 0 and len(gt) == 0:
        return ItemMetrics(1.0, 1.0, 1.0, True, 0, 0, 0)
    precision = tp / len(pred) if len(pred) else 0.0
    recall = tp / len(gt) if len(gt) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ItemMetrics(precision, recall, f1, fp == 0 and fn == 0, tp, fp, fn)


@dataclass(frozen=True)
class MicroCounts:
    gt_total: int
    pred_total: int
    tp_total: int
    fn_total: int
    fp_total: int

    @property
    def micro_precision(self) -> float:
        return self.tp_total / self.pred_total if self.pred_total else 0.0

    @property
    def micro_recall(self) -> float:
        return self.tp_total / self.gt_total if self.gt_total else 0.0

    @property
    def missing_share(self) -> float:
        """False negatives as a fraction of ground truth."""
        return self.fn_total / self.gt_total if self.gt_total else 0.0

    @property
    def extra_share(self) -> float:
        """False positives as a fraction of predictions."""
        return self.fp_total / self.pred_total if self.pred_total else 0.0


@dataclass(frozen=True)
class BucketRow:
    count: int
    avg_f1: float


@dataclass(frozen=True)
class AggregateReport:
    macro_precision: float
    macro_recall: float
    macro_f1: float
    exact_match_rate: float
    micro: MicroCounts
    by_parts_bucket: dict[str, BucketRow]
    by_category: dict[str, BucketRow]
    pearson_parts_f1: float | None

    def to_dict(self) -> dict:
        return {
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "exact_match_rate": self.exact_match_rate,
            "micro": {
                "gt_total": self.micro.gt_total,
                "pred_total": self.micro.pred_total,
                "tp_total": self.micro.tp_total,
                "fn_total": self.micro.fn_total,
                "fp_total": self.micro.fp_total,
            },
            "by_parts_bucket": {k: [v.count, v.avg_f1] for k, v in self.by_parts_bucket.items()},
            "by_category": {k: [v.count, v.avg_f1] for k, v in self.by_category.items()},
            "pearson_parts_f1": self.pearson_parts_f1,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AggregateReport":
        return cls(
            macro_precision=data["macro_precision"],
            macro_recall=data["macro_recall"],
            macro_f1=data["macro_f1"],
            exact_match_rate=data["exact_match_rate"],
            micro=MicroCounts(**data["micro"]),
            by_parts_bucket={k: BucketRow(*v) for k, v in data["by_parts_bucket"].items()},
            by_category={k: BucketRow(*v) for k, v in data["by_category"].items()},
            pearson_parts_f1=data["pearson_parts_f1"],
        )


def parts_bucket(part_count: int) -> str:
    for label, low, high in PARTS_BUCKETS:
        if part_count >= low and (high is None or part_count <= high):
            return label
    raise ContractError(f"part count {part_count} outside all buckets")


def pearson(xs: list[float], ys: list[float]) -> float | None:
    """Sample correlation; None when either series is constant."""
    if len(xs) != len(ys) or len(xs) < 2:
        return None
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0 or var_y == 0:
        return None
    return cov / math.sqrt(var_x * var_y)


def aggregate(per_item: list[tuple[FurnitureItem, ItemMetrics]]) -> AggregateReport:
    """Macro means over items, micro totals, and complexity/category breakdowns."""
    if not per_item:
        raise ContractError("aggregate requires at least one scored item")

    count = len(per_item)
    macro_p = sum(m.precision for _, m in per_item) / count
    macro_r = sum(m.recall for _, m in per_item) / count
    macro_f1 = sum(m.f1 for _, m in per_item) / count
    exact_rate = sum(1 for _, m in per_item if m.exact) / count

    tp = sum(m.tp for _, m in per_item)
    fp = sum(m.fp for _, m in per_item)
    fn = sum(m.fn for _, m in per_item)
    micro = MicroCounts(
        gt_total=tp + fn, pred_total=tp + fp, tp_total=tp, fn_total=fn, fp_total=fp
    )

    bucket_groups: dict[str, list[float]] = {}
    for item, m in per_item:
        bucket_groups.setdefault(parts_bucket(item.part_count), []).append(m.f1)
    by_bucket = {
        label: BucketRow(len(bucket_groups[label]), sum(bucket_groups[label]) / len(bucket_groups[label]))
        for label, _, _ in PARTS_BUCKETS
        if label in bucket_groups
    }

    category_groups: dict[str, list[float]] = {}
    for item, m in per_item:
        category_groups.setdefault(item.category.value, []).append(m.f1)
    by_category = {
        c.value: BucketRow(
            len(category_groups[c.value]),
            sum(category_groups[c.value]) / len(category_groups[c.value]),
        )
        for c in Category
        if c.value in category_groups
    }

    r = pearson([float(item.part_count) for item, _ in per_item], [m.f1 for _, m in per_item])
    return AggregateReport(
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        exact_match_rate=exact_rate,
        micro=micro,
        by_parts_bucket=by_bucket,
        by_category=by_category,
        pearson_parts_f1=r,
    )


def error_breakdown(
    per_item: list[tuple[FurnitureItem, ConnectionSet, ConnectionSet]],
) -> tuple[int, int, int, int, int]:
    """Corpus-level (gt_total, pred_total, tp, fn, fp) sums over (item, pred, gt) triples."""
    gt_total = pred_total = tp = 0
    for _, pred, gt in per_item:
        gt_total += len(gt)
        pred_total += len(pred)
        tp += len(pred.intersection(gt))
    return (gt_total, pred_total, tp, gt_total - tp, pred_total - tp)
