"""Experiment orchestration: sweeps, ablations, persisted predictions.

Every (method, item) prediction is written to its own JSON file before
any aggregation, so expensive provider calls are decoupled from cheap
re-scoring: ``evaluate`` over a predictions directory reproduces the
report bit for bit, and an interrupted sweep resumes by skipping files
that already exist.
"""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import ConnectionSet, Corpus, FurnitureItem, load_corpus
from .errors import ContractError
from .metrics import AggregateReport, ItemMetrics, aggregate, score_item
from .planner import (
    ParseTier,
    PredictionMethod,
    PredictionOutcome,
    ProviderError,
    ProviderSpec,
    build_prompt,
    build_provider,
    parse_prediction,
    sort_methods,
)
from .retrieval import (
    Bm25Index,
    EmbeddingMatrix,
    RetrievalResult,
    bm25_query,
    build_bm25,
    load_embeddings,
    retrieve_similar,
)

WITHIN_CATEGORY = "within_category"
CROSS_CATEGORY = "cross_category"

_ENV_PATTERN = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def _interpolate_env(value):
    if isinstance(value, str):
        return _ENV_PATTERN.sub(lambda m: os.environ.get(m.group(1), ""), value)
    if isinstance(value, list):
        return [_interpolate_env(v) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate_env(v) for k, v in value.items()}
    return value


@dataclass
class ExperimentConfig:
    corpus_root: Path
    methods: list[PredictionMethod]
    provider: ProviderSpec
    output_dir: Path
    embeddings_path: Path | None = None
    k_values: list[int] = field(default_factory=lambda: [1, 3, 5])
    retrieval_scope: str = WITHIN_CATEGORY
    seed: int = 0
    max_in_flight: int = 1

    def __post_init__(self) -> None:
        if self.retrieval_scope not in (WITHIN_CATEGORY, CROSS_CATEGORY):
            raise ContractError(f"unknown retrieval scope {self.retrieval_scope!r}")
        if any(k < 1 or k > 10 for k in self.k_values):
            raise ContractError("k_values must lie in [1, 10]")
        if self.embeddings_path is None and any(m.needs_embeddings for m in self.methods):
            raise ContractError("rag_images methods require embeddings_path")
        if self.max_in_flight < 1:
            raise ContractError("max_in_flight must be >= 1")

    @classmethod
    def from_json_file(cls, path: Path | str) -> "ExperimentConfig":
        data = _interpolate_env(json.loads(Path(path).read_text()))
        return cls(
            corpus_root=Path(data["corpus_root"]),
            methods=[PredictionMethod.parse(m) for m in data["methods"]],
            provider=ProviderSpec.from_dict(data["provider"]),
            output_dir=Path(data["output_dir"]),
            embeddings_path=Path(data["embeddings_path"]) if data.get("embeddings_path") else None,
            k_values=data.get("k_values", [1, 3, 5]),
            retrieval_scope=data.get("retrieval_scope", WITHIN_CATEGORY),
            seed=data.get("seed", 0),
            max_in_flight=data.get("max_in_flight", 1),
        )


def retrieve_for_method(
    item: FurnitureItem,
    method: PredictionMethod,
    corpus: Corpus,
    bm25_index: Bm25Index | None,
    embeddings: EmbeddingMatrix | None,
    scope: str = WITHIN_CATEGORY,
) -> RetrievalResult | None:
    """Per-method retrieval: exact BM25 lookup or kNN over cover embeddings."""
    if method.needs_bm25:
        if bm25_index is None:
            raise ContractError(f"{method.key} requires a BM25 index")
        return bm25_query(bm25_index, f"{item.category.value} {item.name}", 1)
    if method.needs_embeddings:
        if embeddings is None:
            raise ContractError(f"{method.key} requires embeddings")
        category = item.category if scope == WITHIN_CATEGORY else None
        return retrieve_similar(
            embeddings, embeddings.row_for(item.id), item.id, category, method.k, corpus
        )
    return None


def prediction_path(output_dir: Path, method: PredictionMethod, item_id: str) -> Path:
    return output_dir / "predictions" / method.key / f"{item_id}.json"


def _outcome_record(
    item: FurnitureItem,
    method: PredictionMethod,
    outcome: PredictionOutcome,
    error: str | None,
) -> dict:
    return {
        "item": item.id,
        "category": item.category.value,
        "part_count": item.part_count,
        "method": method.key,
        "raw_text": outcome.raw_text,
        "parse_tier": outcome.parse_tier.value,
        "connections": outcome.parsed.to_list(),
        "rejected": [[list(pair), reason] for pair, reason in outcome.rejected],
        "error": error,
    }


def load_outcome_record(path: Path) -> dict:
    return json.loads(path.read_text())


def _write_record(path: Path, record: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(record, sort_keys=True, indent=1))
    os.replace(tmp, path)


def _predict_one(
    item: FurnitureItem,
    method: PredictionMethod,
    provider,
    corpus: Corpus,
    bm25_index: Bm25Index | None,
    embeddings: EmbeddingMatrix | None,
    scope: str,
) -> dict:
    retrieved = retrieve_for_method(item, method, corpus, bm25_index, embeddings, scope)
    bundle = build_prompt(item, method, retrieved, corpus)
    try:
        raw = provider.complete(bundle, item)
        outcome = parse_prediction(raw, item.part_count)
        error = None
    except ProviderError as exc:
        outcome = PredictionOutcome("", ConnectionSet.empty(), ParseTier.FAILED)
        error = str(exc)
    return _outcome_record(item, method, outcome, error)


def _score_records(
    corpus: Corpus, records: dict[str, dict]
) -> list[tuple[FurnitureItem, ItemMetrics]]:
    scored = []
    for item in corpus:
        record = records[item.id]
        pred = ConnectionSet.from_pairs(tuple(map(tuple, record["connections"])))
        scored.append((item, score_item(pred, item.ground_truth)))
    return scored


def run_method(
    config: ExperimentConfig,
    method: PredictionMethod,
    corpus: Corpus,
    bm25_index: Bm25Index | None,
    embeddings: EmbeddingMatrix | None,
    output_dir: Path | None = None,
) -> tuple[AggregateReport, list[tuple[FurnitureItem, ItemMetrics]]]:
    """Predict every item with one method (resuming over persisted files), then score."""
    output_dir = output_dir or config.output_dir
    provider = build_provider(config.provider)

    pending = [
        item for item in corpus if not prediction_path(output_dir, method, item.id).exists()
    ]

    def worker(item: FurnitureItem) -> None:
        record = _predict_one(
            item, method, provider, corpus, bm25_index, embeddings, config.retrieval_scope
        )
        _write_record(prediction_path(output_dir, method, item.id), record)

    if config.max_in_flight == 1:
        for item in pending:
            worker(item)
    else:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            list(pool.map(worker, pending))

    records = {
        item.id: load_outcome_record(prediction_path(output_dir, method, item.id))
        for item in corpus
    }
    scored = _score_records(corpus, records)
    return aggregate(scored), scored


def _load_inputs(
    config: ExperimentConfig, corpus: Corpus | None
) -> tuple[Corpus, Bm25Index | None, EmbeddingMatrix | None]:
    corpus = corpus or load_corpus(config.corpus_root)
    needs_bm25 = any(m.needs_bm25 for m in config.methods)
    bm25_index = build_bm25(corpus) if needs_bm25 else None
    embeddings = load_embeddings(config.embeddings_path) if config.embeddings_path else None
    return corpus, bm25_index, embeddings


def run_experiment(
    config: ExperimentConfig, corpus: Corpus | None = None
) -> dict[str, AggregateReport]:
    """Run every configured method over the corpus; returns reports in canonical order."""
    corpus, bm25_index, embeddings = _load_inputs(config, corpus)
    reports: dict[str, AggregateReport] = {}
    per_item: dict[str, list] = {}
    for method in sort_methods(config.methods):
        report, scored = run_method(config, method, corpus, bm25_index, embeddings)
        reports[method.key] = report
        per_item[method.key] = scored
    write_report_file(config.output_dir / "report.json", reports, per_item)
    return reports


def evaluate_predictions(
    corpus: Corpus,
    predictions_dir: Path | str,
    methods: list[PredictionMethod] | None = None,
) -> tuple[dict[str, AggregateReport], dict[str, list[tuple[FurnitureItem, ItemMetrics]]]]:
    """Re-score persisted predictions; bit-for-bit reproducible from the files alone."""
    predictions_dir = Path(predictions_dir)
    if methods is None:
        discovered = sorted(d.name for d in predictions_dir.iterdir() if d.is_dir())
        methods = [_method_from_key(key) for key in discovered]
    reports: dict[str, AggregateReport] = {}
    per_item: dict[str, list] = {}
    for method in sort_methods(methods):
        records = {}
        for item in corpus:
            path = predictions_dir / method.key / f"{item.id}.json"
            if not path.exists():
                raise ContractError(f"missing persisted prediction {path}")
            records[item.id] = load_outcome_record(path)
        scored = _score_records(corpus, records)
        reports[method.key] = aggregate(scored)
        per_item[method.key] = scored
    return reports, per_item


def _method_from_key(key: str) -> PredictionMethod:
    match = re.fullmatch(r"rag_images_k(\d+)", key)
    if match:
        return PredictionMethod.rag_images(int(match.group(1)))
    return PredictionMethod.parse(key)


def run_k_ablation(
    config: ExperimentConfig, corpus: Corpus | None = None
) -> list[tuple[int, AggregateReport]]:
    """One RAG-with-images run per k, identical provider and seed throughout."""
    if config.embeddings_path is None:
        raise ContractError("k ablation requires embeddings_path")
    corpus = corpus or load_corpus(config.corpus_root)
    embeddings = load_embeddings(config.embeddings_path)
    rows = []
    for k in config.k_values:
        method = PredictionMethod.rag_images(k)
        sub = replace(config, methods=[method], output_dir=config.output_dir / "ablate_k")
        report, _ = run_method(sub, method, corpus, None, embeddings)
        rows.append((k, report))
    return rows


def run_scope_ablation(
    config: ExperimentConfig, corpus: Corpus | None = None, k: int | None = None
) -> list[tuple[str, AggregateReport]]:
    """Within-category vs cross-category example retrieval; target always excluded."""
    if config.embeddings_path is None:
        raise ContractError("scope ablation requires embeddings_path")
    corpus = corpus or load_corpus(config.corpus_root)
    embeddings = load_embeddings(config.embeddings_path)
    method = PredictionMethod.rag_images(k if k is not None else 3)
    rows = []
    for scope in (WITHIN_CATEGORY, CROSS_CATEGORY):
        sub = replace(
            config,
            methods=[method],
            retrieval_scope=scope,
            output_dir=config.output_dir / "ablate_scope" / scope,
        )
        report, _ = run_method(sub, method, corpus, None, embeddings)
        rows.append((scope, report))
    return rows


def write_report_file(
    path: Path,
    reports: dict[str, AggregateReport],
    per_item: dict[str, list[tuple[FurnitureItem, ItemMetrics]]],
) -> None:
    payload = {
        "schema": "flatpack-report/1",
        "methods": {
            key: {
                "aggregate": report.to_dict(),
                "per_item": [
                    {
                        "item": item.id,
                        "category": item.category.value,
                        "part_count": item.part_count,
                        "precision": m.precision,
                        "recall": m.recall,
                        "f1": m.f1,
                        "exact": m.exact,
                        "tp": m.tp,
                        "fp": m.fp,
                        "fn": m.fn,
                    }
                    for item, m in per_item[key]
                ],
            }
            for key, report in reports.items()
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, sort_keys=True, indent=1))
    os.replace(tmp, path)
