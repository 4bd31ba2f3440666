"""Report rendering: aligned text tables, CSV exports, and figure files.

Table layouts mirror the harness's canonical summaries: one row per
method, F1 by part-count bucket, F1 by category, the corpus-level error
breakdown, and the k / retrieval-scope ablations.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .metrics import PARTS_BUCKETS, AggregateReport

_METHOD_LABELS = {
    "zero_shot": "Zero-Shot",
    "cover_page": "Cover Page",
    "full_manual": "Full Manual",
    "oracle": "Oracle",
}


def method_label(key: str) -> str:
    if key.startswith("rag_images_k"):
        return f"RAG Images (k={key.removeprefix('rag_images_k')})"
    return _METHOD_LABELS.get(key, key)


def _order_keys(keys) -> list[str]:
    def sort_key(key: str):
        base = "rag_images" if key.startswith("rag_images_k") else key
        order = ["zero_shot", "cover_page", "rag_images", "full_manual", "oracle"]
        rank = order.index(base) if base in order else len(order)
        k = int(key.removeprefix("rag_images_k")) if key.startswith("rag_images_k") else 0
        return (rank, k)

    return sorted(keys, key=sort_key)


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines)


def render_main_table(reports: dict[str, AggregateReport]) -> str:
    rows = [
        [
            method_label(key),
            f"{reports[key].macro_f1:.3f}",
            f"{reports[key].macro_precision:.3f}",
            f"{reports[key].macro_recall:.3f}",
            f"{reports[key].exact_match_rate * 100:.1f}%",
        ]
        for key in _order_keys(reports)
    ]
    return _table(["Method", "F1", "Prec.", "Recall", "Exact"], rows)


def render_complexity_table(report: AggregateReport) -> str:
    rows = [
        [label, str(report.by_parts_bucket[label].count), f"{report.by_parts_bucket[label].avg_f1:.3f}"]
        for label, _, _ in PARTS_BUCKETS
        if label in report.by_parts_bucket
    ]
    table = _table(["Parts", "Count", "Avg F1"], rows)
    if report.pearson_parts_f1 is not None:
        table += f"\nPearson r (parts vs F1): {report.pearson_parts_f1:.3f}"
    else:
        table += "\nPearson r (parts vs F1): undefined (constant series)"
    return table


def render_category_table(report: AggregateReport) -> str:
    ordered = sorted(report.by_category.items(), key=lambda kv: (-kv[1].avg_f1, kv[0]))
    rows = [[name, str(row.count), f"{row.avg_f1:.3f}"] for name, row in ordered]
    return _table(["Category", "Count", "Avg F1"], rows)


def render_error_table(report: AggregateReport) -> str:
    micro = report.micro
    rows = [
        ["Ground Truth Connections", f"{micro.gt_total:,}"],
        ["Predicted Connections", f"{micro.pred_total:,}"],
        ["Correct (True Positives)", f"{micro.tp_total:,} ({micro.micro_recall * 100:.1f}% recall)"],
        ["Missing (False Negatives)", f"{micro.fn_total:,} ({micro.missing_share * 100:.1f}% of GT)"],
        ["Extra (False Positives)", f"{micro.fp_total:,} ({micro.extra_share * 100:.1f}% of pred.)"],
    ]
    return _table(["Metric", "Value"], rows)


def render_k_table(rows: list[tuple[int, AggregateReport]]) -> str:
    body = [
        [
            f"k={k}",
            f"{report.macro_f1:.3f}",
            f"{report.macro_precision:.3f}",
            f"{report.macro_recall:.3f}",
            f"{report.exact_match_rate * 100:.1f}%",
        ]
        for k, report in rows
    ]
    return _table(["k", "F1", "Prec.", "Recall", "Exact"], body)


def render_scope_table(rows: list[tuple[str, AggregateReport]]) -> str:
    labels = {"within_category": "Within-Category", "cross_category": "Cross-Category"}
    body = [
        [labels.get(scope, scope), f"{report.macro_f1:.3f}", f"{report.exact_match_rate * 100:.1f}%"]
        for scope, report in rows
    ]
    by_scope = dict(rows)
    if "within_category" in by_scope and "cross_category" in by_scope:
        delta_f1 = by_scope["within_category"].macro_f1 - by_scope["cross_category"].macro_f1
        delta_exact = (
            by_scope["within_category"].exact_match_rate
            - by_scope["cross_category"].exact_match_rate
        )
        body.append(["Difference", f"{delta_f1:+.3f}", f"{delta_exact * 100:+.1f}%"])
    return _table(["Strategy", "F1", "Exact"], body)


def load_report_file(path: Path | str) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != "flatpack-report/1":
        raise ValueError(f"{path}: not a flatpack report file")
    return data


def write_summary_csv(path: Path, reports: dict[str, AggregateReport]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["method", "macro_f1", "macro_precision", "macro_recall", "exact_match_rate"])
        for key in _order_keys(reports):
            r = reports[key]
            writer.writerow(
                [key, f"{r.macro_f1:.6f}", f"{r.macro_precision:.6f}", f"{r.macro_recall:.6f}", f"{r.exact_match_rate:.6f}"]
            )


def write_per_item_csv(path: Path, per_item: dict[str, list[dict]]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["method", "item", "category", "part_count", "precision", "recall", "f1", "exact", "tp", "fp", "fn"]
        )
        for key in _order_keys(per_item):
            for row in per_item[key]:
                writer.writerow(
                    [
                        key,
                        row["item"],
                        row["category"],
                        row["part_count"],
                        f"{row['precision']:.6f}",
                        f"{row['recall']:.6f}",
                        f"{row['f1']:.6f}",
                        int(row["exact"]),
                        row["tp"],
                        row["fp"],
                        row["fn"],
                    ]
                )


def save_figures(out_dir: Path, reports: dict[str, AggregateReport], per_item: dict[str, list[dict]]) -> list[Path]:
    """Render the standard report figures as PNG files; returns the paths written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    keys = _order_keys(reports)

    fig, ax = plt.subplots(figsize=(7, 4))
    labels = [method_label(k) for k in keys]
    ax.bar(labels, [reports[k].macro_f1 for k in keys], color="#4878a8")
    ax.set_ylabel("Macro F1")
    ax.set_ylim(0, 1.05)
    ax.set_title("Connection F1 by method")
    ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    path = out_dir / "methods_f1.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    # remaining figures describe the best-performing (last canonical) method
    focus = keys[-1]
    report = reports[focus]

    bucket_labels = [label for label, _, _ in PARTS_BUCKETS if label in report.by_parts_bucket]
    if bucket_labels:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar(bucket_labels, [report.by_parts_bucket[b].avg_f1 for b in bucket_labels], color="#5a9c6e")
        ax.set_xlabel("Parts")
        ax.set_ylabel("Avg F1")
        ax.set_ylim(0, 1.05)
        ax.set_title(f"F1 by part count ({method_label(focus)})")
        fig.tight_layout()
        path = out_dir / "f1_by_bucket.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if report.by_category:
        fig, ax = plt.subplots(figsize=(6, 4))
        names = list(report.by_category)
        ax.bar(names, [report.by_category[c].avg_f1 for c in names], color="#a8784a")
        ax.set_ylabel("Avg F1")
        ax.set_ylim(0, 1.05)
        ax.set_title(f"F1 by category ({method_label(focus)})")
        fig.tight_layout()
        path = out_dir / "f1_by_category.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    rows = per_item.get(focus, [])
    if rows:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.scatter([r["part_count"] for r in rows], [r["f1"] for r in rows], s=24, alpha=0.7, color="#7a4aa8")
        ax.set_xlabel("Part count")
        ax.set_ylabel("F1")
        ax.set_ylim(-0.05, 1.05)
        r = report.pearson_parts_f1
        suffix = f" (r={r:.2f})" if r is not None else ""
        ax.set_title(f"F1 vs part count ({method_label(focus)}){suffix}")
        fig.tight_layout()
        path = out_dir / "f1_vs_parts.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written


def emit_report_bundle(report_file: Path | str, out_dir: Path | str) -> list[Path]:
    """Full report path: text tables, CSVs, and figures from a saved report file."""
    data = load_report_file(report_file)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = {
        key: AggregateReport.from_dict(entry["aggregate"]) for key, entry in data["methods"].items()
    }
    per_item = {key: entry["per_item"] for key, entry in data["methods"].items()}

    written: list[Path] = []
    focus = _order_keys(reports)[-1]
    sections = [
        ("Main results", render_main_table(reports)),
        (f"F1 by part count ({method_label(focus)})", render_complexity_table(reports[focus])),
        (f"F1 by category ({method_label(focus)})", render_category_table(reports[focus])),
        (f"Error analysis ({method_label(focus)})", render_error_table(reports[focus])),
    ]
    text = "\n\n".join(f"{title}\n{body}" for title, body in sections) + "\n"
    tables_path = out_dir / "tables.txt"
    tables_path.write_text(text)
    written.append(tables_path)

    summary_csv = out_dir / "summary.csv"
    write_summary_csv(summary_csv, reports)
    written.append(summary_csv)
    items_csv = out_dir / "per_item.csv"
    write_per_item_csv(items_csv, per_item)
    written.append(items_csv)

    written += save_figures(out_dir, reports, per_item)
    return written
