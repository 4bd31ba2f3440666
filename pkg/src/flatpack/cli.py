"""Command-line interface.

Exit status is nonzero iff a hard error occurred; per-item provider
failures inside a sweep are recorded in the persisted predictions and do
not abort it.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import fixtures as fixture_gen
from . import report as report_mod
from .corpus import Category, compute_stats, load_corpus
from .errors import ContractError, CorpusError
from .harness import (
    ExperimentConfig,
    evaluate_predictions,
    retrieve_for_method,
    run_experiment,
    run_k_ablation,
    run_scope_ablation,
    write_report_file,
)
from .planner import PredictionMethod, ProviderSpec
from .retrieval import Bm25Index, bm25_query, build_bm25, load_embeddings, retrieve_similar
from .simulator import run_rra_loop


@click.group()
def main() -> None:
    """Retrieval-augmented assembly planning over furniture manuals."""


@main.command()
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit the canonical corpus description.")
def ingest(corpus_root: str, as_json: bool) -> None:
    """Load and validate a corpus root."""
    try:
        corpus = load_corpus(corpus_root)
    except CorpusError as exc:
        raise click.ClickException(str(exc)) from exc
    if as_json:
        click.echo(json.dumps(corpus.describe(), indent=1, sort_keys=True))
    else:
        click.echo(f"loaded {len(corpus)} items from {corpus_root}")
        for category, ids in sorted(corpus.by_category.items()):
            click.echo(f"  {category.value}: {len(ids)}")


@main.command()
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None)
def stats(corpus_root: str, json_out: str | None) -> None:
    """Dataset statistics (items, parts, connections, per-category table)."""
    corpus = load_corpus(corpus_root)
    result = compute_stats(corpus)
    click.echo(f"items: {result.item_count}")
    click.echo(f"total parts: {result.total_parts}, total connections: {result.total_connections}")
    click.echo(
        f"parts/item: mean {result.parts_mean:.2f} std {result.parts_std:.2f}"
        f" range [{result.parts_min}, {result.parts_max}]"
    )
    click.echo(
        f"connections/item: mean {result.connections_mean:.2f} std {result.connections_std:.2f}"
        f" range [{result.connections_min}, {result.connections_max}]"
    )
    click.echo(f"{'Category':<10}{'Count':>6}{'Avg Parts':>11}{'Avg Conns':>11}")
    for category, row in result.per_category.items():
        click.echo(
            f"{category.value:<10}{row.count:>6}{row.avg_parts:>11.1f}{row.avg_connections:>11.1f}"
        )
    if json_out:
        Path(json_out).write_text(json.dumps(result.to_dict(), indent=1, sort_keys=True))
        click.echo(f"wrote {json_out}")


@main.group()
def index() -> None:
    """Retrieval index maintenance."""


@index.command("build")
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def index_build(corpus_root: str, out_path: str) -> None:
    """Build the BM25 index over category+name keys and persist it as JSON."""
    corpus = load_corpus(corpus_root)
    idx = build_bm25(corpus)
    Path(out_path).write_text(json.dumps(idx.to_dict(), indent=1, sort_keys=True))
    click.echo(f"indexed {idx.doc_count} documents -> {out_path}")


@main.group()
def retrieve() -> None:
    """Ad-hoc retrieval queries."""


@retrieve.command("bm25")
@click.option("--query", required=True)
@click.option("--corpus", "corpus_root", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--index", "index_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--k", default=5, show_default=True)
def retrieve_bm25(query: str, corpus_root: str | None, index_path: str | None, k: int) -> None:
    """Rank items by BM25 score for a free-text query."""
    if index_path:
        idx = Bm25Index.from_dict(json.loads(Path(index_path).read_text()))
    elif corpus_root:
        idx = build_bm25(load_corpus(corpus_root))
    else:
        raise click.ClickException("provide --corpus or --index")
    result = bm25_query(idx, query, k)
    if not result:
        click.echo("(no matches)")
    for rank, (item_id, score) in enumerate(result.ranked, start=1):
        click.echo(f"{rank:>2}. {item_id}  {score:.4f}")


@retrieve.command("knn")
@click.option("--target", required=True)
@click.option("--k", default=3, show_default=True)
@click.option("--category", "category_name", default=None, help="Restrict to one category (defaults to the target's).")
@click.option("--cross", is_flag=True, help="Disable the category filter.")
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True, dir_okay=False))
def retrieve_knn(target: str, k: int, category_name: str | None, cross: bool, corpus_root: str, embeddings_path: str) -> None:
    """Nearest same-category neighbors of an item's stored embedding."""
    corpus = load_corpus(corpus_root)
    emb = load_embeddings(embeddings_path)
    item = corpus.get(target)
    if cross:
        category = None
    else:
        category = Category(category_name) if category_name else item.category
    result = retrieve_similar(emb, emb.row_for(target), target, category, k, corpus)
    if not result:
        click.echo("(no candidates)")
    for rank, (item_id, dist) in enumerate(result.ranked, start=1):
        click.echo(f"{rank:>2}. {item_id}  d2={dist:.4f}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def predict(config_path: str) -> None:
    """Run the configured methods over the corpus, persisting every prediction."""
    config = ExperimentConfig.from_json_file(config_path)
    reports = run_experiment(config)
    click.echo(report_mod.render_main_table(reports))
    click.echo(f"\npredictions and report.json under {config.output_dir}")


@main.command()
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--predictions", "predictions_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def evaluate(corpus_root: str, predictions_dir: str, out_path: str | None) -> None:
    """Re-score persisted predictions into a report."""
    corpus = load_corpus(corpus_root)
    reports, per_item = evaluate_predictions(corpus, predictions_dir)
    click.echo(report_mod.render_main_table(reports))
    if out_path:
        write_report_file(Path(out_path), reports, per_item)
        click.echo(f"wrote {out_path}")


@main.group()
def ablate() -> None:
    """Retrieval ablations."""


@ablate.command("k")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def ablate_k(config_path: str) -> None:
    """Sweep the retrieved-example count."""
    config = ExperimentConfig.from_json_file(config_path)
    rows = run_k_ablation(config)
    click.echo(report_mod.render_k_table(rows))


@ablate.command("scope")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def ablate_scope(config_path: str) -> None:
    """Within-category vs cross-category example retrieval."""
    config = ExperimentConfig.from_json_file(config_path)
    rows = run_scope_ablation(config)
    click.echo(report_mod.render_scope_table(rows))


@main.command()
@click.option("--corpus", "corpus_root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--item", "item_id", required=True)
@click.option("--provider", "provider_spec", default="oracle", show_default=True)
@click.option("--method", "method_spec", default="full_manual", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--budget", default=64, show_default=True)
@click.option("--log", "log_path", default=None, type=click.Path(dir_okay=False))
@click.option("--frames", "frames_dir", default=None, type=click.Path(file_okay=False))
def simulate(
    corpus_root: str,
    item_id: str,
    provider_spec: str,
    method_spec: str,
    seed: int,
    budget: int,
    log_path: str | None,
    frames_dir: str | None,
) -> None:
    """Run one Retrieve-Reason-Act episode in the kinematic workspace."""
    corpus = load_corpus(corpus_root)
    item = corpus.get(item_id)
    method = PredictionMethod.parse(method_spec)
    provider = ProviderSpec.parse(provider_spec)
    bm25_index = build_bm25(corpus) if method.needs_bm25 else None
    retrieved = retrieve_for_method(item, method, corpus, bm25_index, None)
    log = run_rra_loop(
        item, provider, method, budget, corpus, retrieved=retrieved, seed=seed, frames_dir=frames_dir
    )
    outcome = log.outcome
    click.echo(
        f"outcome: {outcome.kind} (delivered {outcome.delivered}/{item.part_count},"
        f" {len(log.directives)} directives, {len(log.primitives)} primitives)"
    )
    if log_path:
        Path(log_path).write_text(log.to_jsonl())
        click.echo(f"wrote {log_path}")


@main.command()
@click.option("--report", "report_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", "out_dir", required=True, type=click.Path(file_okay=False))
def report(report_path: str, out_dir: str) -> None:
    """Render tables, CSVs, and figures from a saved report file."""
    written = report_mod.emit_report_bundle(report_path, out_dir)
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=7, show_default=True)
def fixtures(out_dir: str, seed: int) -> None:
    """Generate the synthetic fixture corpus and its embedding file."""
    root = fixture_gen.generate_fixture_corpus(out_dir, seed=seed)
    corpus = load_corpus(root)
    click.echo(f"wrote {len(corpus)} items under {root}")


if __name__ == "__main__":
    try:
        main()
    except ContractError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
