"""Benchmark harness: load a dataset, run a matcher over it, report accuracy.

The run is deterministic for a fixed (manifest, config, seed): every random
choice flows through a counter stream derived from (seed, image index), so
worker scheduling cannot change results, and the prediction log contains no
timing or environment state.  Timing lives only in the report and covers the
matcher call alone.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import MatchConfig
from .errors import ConfigError, DataError
from .formats import load_attention_map, load_embedding_set
from .manifest import ImageRecord, Manifest, load_manifest, validate_rows
from .matchers import matcher_from_config
from .rng import SplitStream
from .synonyms import ClassTextualSet, SynonymCandidate, build_textual_set, filter_synonyms
from .views import build_view_set, mean_activation, select_views

ABLATION_AXES = ("synonyms_max", "n_views", "matcher")


@dataclass
class EvalReport:
    dataset: str
    n_images: int
    top1_accuracy: float
    per_class_accuracy: dict[str, float]
    mean_inference_seconds: float
    seed: int
    config: dict
    retained_synonyms: dict[str, list[str]]
    predictions: list[dict] = field(default_factory=list)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "dataset": self.dataset,
            "n_images": self.n_images,
            "top1_accuracy": self.top1_accuracy,
            "per_class_accuracy": self.per_class_accuracy,
            "seed": self.seed,
            "config": self.config,
            "retained_synonyms": self.retained_synonyms,
        }
        if include_timing:
            d["mean_inference_seconds"] = self.mean_inference_seconds
        return d


def _truncated_synonyms(record, synonyms_max: int):
    kept = []
    extras = 0
    for entry in record.synonyms:
        if entry.is_original:
            kept.append(entry)
        elif extras < synonyms_max:
            kept.append(entry)
            extras += 1
    return kept


def build_textual_sets(
    manifest: Manifest, prompt_rows: np.ndarray, config: MatchConfig
) -> tuple[list[ClassTextualSet], dict[str, list[str]]]:
    """Synonym truncation, the topological filter, and prompt assembly."""
    per_class = []
    for record in manifest.classes:
        entries = _truncated_synonyms(record, config.synonyms_max)
        cands = [
            SynonymCandidate(e.text, prompt_rows[e.row], e.is_original) for e in entries
        ]
        per_class.append((record.class_id, cands))
    retained = filter_synonyms(per_class, config.ambiguity_metric)

    sets = []
    retained_texts = {}
    for record in manifest.classes:
        keep = retained[record.class_id]
        retained_texts[record.class_id] = [c.text for c in keep]
        table = {}
        real_descriptions = []
        for desc in record.descriptions:
            start, _ = desc.rows
            for j, entry in enumerate(record.synonyms):
                table[(entry.text, desc.text)] = prompt_rows[start + j]
            if desc.text:
                real_descriptions.append(desc.text)
        sets.append(
            build_textual_set(
                record.class_id,
                keep,
                real_descriptions,
                lambda syn, desc, t=table: t[(syn, desc)],
            )
        )
    return sets, retained_texts


def _load_image_arrays(manifest: Manifest, record: ImageRecord, text_dim: int):
    try:
        views = load_embedding_set(manifest.resolve(record.views_file))
    except OSError as exc:
        raise DataError(f"image {record.image_id!r}: cannot read views: {exc}") from exc
    try:
        attention = load_attention_map(manifest.resolve(record.attention_file))
    except OSError as exc:
        raise DataError(f"image {record.image_id!r}: cannot read attention: {exc}") from exc
    if views.dim != text_dim:
        raise DataError(
            f"image {record.image_id!r}: view dim {views.dim} != text dim {text_dim}"
        )
    if views.rows != len(record.crop_specs) + 1:
        raise DataError(
            f"image {record.image_id!r}: {views.rows} view rows for "
            f"{len(record.crop_specs)} crop specs"
        )
    return views.as_float64(), attention


def _select_image_views(manifest, record, config, image_index, text_dim):
    """Candidate subsample (seeded per image), activation scoring, two-sigma cut."""
    rows, attention = _load_image_arrays(manifest, record, text_dim)
    n_candidates = len(record.crop_specs)
    if n_candidates == 0:
        # no crops at all: the set is the full image alone
        return build_view_set(rows[0], rows[0][None, :], [])

    if config.n_views < n_candidates:
        stream = SplitStream(config.seed, image_index)
        candidates = stream.sample_indices(n_candidates, config.n_views)
    else:
        candidates = np.arange(n_candidates)

    activations = np.array(
        [mean_activation(attention, record.crop_specs[i]) for i in candidates]
    )
    if config.select_views:
        local = select_views(activations)
    else:
        local = np.arange(1, len(candidates) + 1)
    global_rows = [int(candidates[i - 1]) + 1 for i in local]
    return build_view_set(rows[0], rows[1:], global_rows)


def _worker_count() -> int:
    env = os.environ.get("CPE_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"CPE_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError(f"CPE_THREADS must be >= 1, got {n}")
        return n
    return min(8, os.cpu_count() or 1)


def run_benchmark(manifest_path: str | Path, config: MatchConfig) -> EvalReport:
    """Classify every image in the manifest and tally top-1 accuracy."""
    manifest = load_manifest(manifest_path)
    text_set = load_embedding_set(manifest.resolve(manifest.text_embedding_file))
    validate_rows(manifest, text_set)
    prompt_rows = text_set.as_float64()

    textual_sets, retained_texts = build_textual_sets(manifest, prompt_rows, config)
    matcher = matcher_from_config(config).fit(textual_sets)
    class_ids = matcher.classes_.tolist()

    def classify(job):
        image_index, record = job
        view_set = _select_image_views(
            manifest, record, config, image_index, text_set.dim
        )
        started = time.perf_counter()
        proba = matcher.predict_proba(view_set)[0]
        elapsed = time.perf_counter() - started
        predicted = class_ids[int(np.argmax(proba))]
        return {
            "image_id": record.image_id,
            "true_class_id": record.true_class_id,
            "predicted_class_id": predicted,
            "probabilities": [float(p) for p in proba],
            "views_used": view_set.size,
        }, elapsed

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        outcomes = list(pool.map(classify, enumerate(manifest.images)))

    predictions = [p for p, _ in outcomes]
    timings = [t for _, t in outcomes]

    per_class_total: dict[str, int] = {}
    per_class_hit: dict[str, int] = {}
    correct = 0
    for p in predictions:
        truth = p["true_class_id"]
        per_class_total[truth] = per_class_total.get(truth, 0) + 1
        hit = p["predicted_class_id"] == truth
        per_class_hit[truth] = per_class_hit.get(truth, 0) + int(hit)
        correct += int(hit)

    return EvalReport(
        dataset=manifest.dataset_name,
        n_images=len(predictions),
        top1_accuracy=correct / len(predictions) if predictions else 0.0,
        per_class_accuracy={
            cid: per_class_hit.get(cid, 0) / n for cid, n in sorted(per_class_total.items())
        },
        mean_inference_seconds=float(np.mean(timings)) if timings else 0.0,
        seed=config.seed,
        config=config.to_dict(),
        retained_synonyms=retained_texts,
        predictions=predictions,
    )


def run_repeats(
    manifest_path: str | Path, config: MatchConfig, seeds: Sequence[int]
) -> dict:
    """Re-run the benchmark per seed; summarize mean and population spread."""
    if len(seeds) < 2:
        raise ConfigError("run_repeats needs at least 2 seeds")
    reports = [run_benchmark(manifest_path, config.replace(seed=int(s))) for s in seeds]
    accs = np.array([r.top1_accuracy for r in reports])
    times = np.array([r.mean_inference_seconds for r in reports])
    return {
        "seeds": [int(s) for s in seeds],
        "top1_accuracy": {
            "per_seed": accs.tolist(),
            "mean": float(np.mean(accs)),
            "stddev": float(np.std(accs)),
        },
        "mean_inference_seconds": {
            "per_seed": times.tolist(),
            "mean": float(np.mean(times)),
            "stddev": float(np.std(times)),
        },
        "reports": reports,
    }


def run_ablation(
    manifest_path: str | Path,
    base_config: MatchConfig,
    axis: str,
    values: Sequence,
) -> list[EvalReport]:
    """One benchmark per value of the swept setting, everything else fixed."""
    if axis not in ABLATION_AXES:
        raise ConfigError(f"unknown ablation axis {axis!r}, expected one of {ABLATION_AXES}")
    if len(values) == 0:
        raise ConfigError("ablation needs at least one value")
    reports = []
    for value in values:
        reports.append(run_benchmark(manifest_path, base_config.replace(**{axis: value})))
    return reports


def prediction_log_lines(report: EvalReport) -> list[str]:
    return [json.dumps(p, sort_keys=True) for p in report.predictions]


def format_report(report: EvalReport) -> str:
    rows = [
        ("dataset", report.dataset),
        ("images", str(report.n_images)),
        ("matcher", report.config["matcher"]),
        ("seed", str(report.seed)),
        ("top-1 accuracy", f"{report.top1_accuracy:.4f}"),
        ("mean inference s", f"{report.mean_inference_seconds:.6f}"),
    ]
    width = max(len(k) for k, _ in rows)
    lines = [f"{k:<{width}}  {v}" for k, v in rows]
    lines.append("")
    cwidth = max(len(c) for c in report.per_class_accuracy)
    for cid, acc in report.per_class_accuracy.items():
        lines.append(f"{cid:<{cwidth}}  {acc:.4f}")
    return "\n".join(lines) + "\n"


def format_ablation(axis: str, values: Sequence, reports: Sequence[EvalReport]) -> str:
    header = f"{axis:<16}  top-1   images"
    lines = [header, "-" * len(header)]
    for value, report in zip(values, reports):
        lines.append(f"{value!s:<16}  {report.top1_accuracy:.4f}  {report.n_images}")
    return "\n".join(lines) + "\n"


def format_repeats(summary: dict) -> str:
    acc = summary["top1_accuracy"]
    lines = [
        f"seeds             {', '.join(str(s) for s in summary['seeds'])}",
        f"top-1 per seed    {', '.join(f'{a:.4f}' for a in acc['per_seed'])}",
        f"top-1 mean        {acc['mean']:.4f}",
        f"top-1 stddev      {acc['stddev']:.6f}",
    ]
    return "\n".join(lines) + "\n"


def write_report_files(report: EvalReport, out_dir: str | Path) -> None:
    """report.json, report.txt, predictions.jsonl, retained_synonyms.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_dir / "report.txt").write_text(format_report(report), encoding="utf-8")
    (out_dir / "predictions.jsonl").write_text(
        "\n".join(prediction_log_lines(report)) + "\n", encoding="utf-8"
    )
    (out_dir / "retained_synonyms.json").write_text(
        json.dumps({"retained_synonyms": report.retained_synonyms}, indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
