"""Deterministic synthetic dataset builders.

Each builder writes a complete on-disk dataset (manifest, prompt embeddings,
per-image view embeddings, attention maps) that the benchmark harness can run
unmodified.  The generative story is shared: every class has a direction on
the unit sphere, synonyms and prompts are noisy copies of that direction,
images carry an attention blob, and each crop's embedding quality follows how
much attention mass the crop covers.  Classes come in confusable pairs, each
synonym list ends in a decoy aimed at an unrelated class, and a few tiny
crops per image sit in a far corner of the frame where attention is dead;
those crops embed as near-pure background, so the matchers and the filtering
stages have something real to disagree about.

Everything is drawn through seeded SplitStream counters: the same seed
reproduces the same bytes on the same platform.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .formats import (
    EmbeddingSet,
    load_attention_map,
    load_embedding_set,
    save_attention_map,
    save_embedding_set,
)
from .manifest import (
    ClassRecord,
    DescriptionEntry,
    ImageRecord,
    Manifest,
    SynonymEntry,
    load_manifest,
    save_manifest,
)
from .rng import SplitStream
from .views import CropSpec, generate_crop_specs, mean_activation


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _orthonormal(stream: SplitStream, dim: int, k: int) -> np.ndarray:
    """k orthonormal rows; sign-fixed so the draw alone pins the result."""
    g = stream.gauss_vector(dim * dim).reshape(dim, dim)
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))[None, :]
    return q[:, :k].T


def _paired_directions(stream: SplitStream, dim: int, n_classes: int, gamma: float) -> np.ndarray:
    """Class directions where (2k, 2k+1) are confusable, other pairs orthogonal."""
    basis = _orthonormal(stream, dim, n_classes)
    dirs = basis.copy()
    for k in range(1, n_classes, 2):
        dirs[k] = _unit(basis[k] + gamma * basis[k - 1])
    return dirs


def _pair_of(k: int, n_classes: int) -> int:
    mate = k + 1 if k % 2 == 0 else k - 1
    return mate if mate < n_classes else (k + 1) % n_classes


def _write_embeddings(rows: np.ndarray, path: Path, set_id: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    save_embedding_set(EmbeddingSet(rows.astype(np.float32), set_id), path)


def _gaussian_blob(stream: SplitStream, size: int) -> tuple[np.ndarray, float, float]:
    # compact blob well inside the frame so far corners carry almost no mass
    cx = stream.uniform(0.38, 0.62)
    cy = stream.uniform(0.38, 0.62)
    sigma = stream.uniform(0.08, 0.11)
    coords = (np.arange(size) + 0.5) / size
    dx2 = (coords[None, :] - cx) ** 2
    dy2 = (coords[:, None] - cy) ** 2
    return 0.015 + np.exp(-(dx2 + dy2) / (2.0 * sigma * sigma)), cx, cy


def _jitter(stream: SplitStream, dim: int) -> np.ndarray:
    """Gaussian direction with expected length about 1, whatever the width."""
    return np.array(stream.gauss_vector(dim)) / np.sqrt(dim)


def make_exact_fixture(
    out_dir: str | Path,
    n_classes: int = 4,
    images_per_class: int = 3,
    dim: int = 8,
    seed: int = 0,
    permute_labels: bool = False,
) -> Path:
    """Degenerate dataset where every view set IS its class prompt.

    Accuracy must be exactly 1.0; with `permute_labels` every image is
    relabeled to the next class, forcing exactly 0.0.
    """
    out_dir = Path(out_dir)
    root = SplitStream(seed)
    anchors = _orthonormal(root.substream(1), dim, n_classes)
    _write_embeddings(anchors, out_dir / "prompts.cpeb", "prompts")

    classes = []
    for k in range(n_classes):
        classes.append(
            ClassRecord(
                class_id=f"class-{k}",
                given_name=f"class-{k}",
                synonyms=[SynonymEntry(f"class-{k}", k, True)],
                # bare-template prompts reuse the synonym rows
                descriptions=[DescriptionEntry("", (k, k + 1))],
            )
        )

    images = []
    flat = np.full((2, 2), 1.0)
    (out_dir / "attention").mkdir(parents=True, exist_ok=True)
    for k in range(n_classes):
        label = (k + 1) % n_classes if permute_labels else k
        for j in range(images_per_class):
            image_id = f"img-{k}-{j}"
            _write_embeddings(anchors[k][None, :], out_dir / "views" / f"{image_id}.cpeb", image_id)
            save_attention_map(flat, out_dir / "attention" / f"{image_id}.cpea")
            images.append(
                ImageRecord(
                    image_id=image_id,
                    true_class_id=f"class-{label}",
                    views_file=f"views/{image_id}.cpeb",
                    attention_file=f"attention/{image_id}.cpea",
                    crop_specs=[],
                )
            )

    manifest = Manifest("exact", "prompts.cpeb", classes, images, out_dir)
    path = out_dir / "manifest.json"
    save_manifest(manifest, path)
    return path


class _SyntheticWorld:
    """Shared textual/visual generator behind the benchmark fixtures."""

    def __init__(
        self,
        seed: int,
        dim: int,
        n_classes: int,
        pair_gamma: float = 1.1,
        synonym_noise: float = 0.45,
        prompt_noise: float = 0.2,
        description_pull: float = 0.3,
        view_noise: float = 0.38,
        background_mix: float = 0.9,
        background_pull: float = 0.68,
        quality_floor: float = 0.26,
        quality_power: float = 1.3,
        name_ambiguity: float = 0.0,
    ):
        self.root = SplitStream(seed)
        self.dim = dim
        self.n_classes = n_classes
        self.synonym_noise = synonym_noise
        self.prompt_noise = prompt_noise
        self.description_pull = description_pull
        self.view_noise = view_noise
        self.background_mix = background_mix
        self.background_pull = background_pull
        self.quality_floor = quality_floor
        self.quality_power = quality_power
        self.name_ambiguity = name_ambiguity
        self.directions = _paired_directions(
            self.root.substream(1), dim, n_classes, pair_gamma
        )

    def decoy_of(self, k: int) -> int:
        # a class outside k's confusable pair, so the decoy synonym sits at
        # moderate similarity to the rest of the set
        return (k + 2) % self.n_classes

    def synonym_embeddings(self, k: int, n_good: int) -> np.ndarray:
        """Original + good synonyms around the class direction, then one
        decoy candidate tilted far toward an unrelated class.

        With name_ambiguity > 0 the original name itself leans toward the
        decoy class, the way a polysemous word does; good synonyms stay
        clean, so enriching the prompt set recovers the class direction.
        """
        s = self.root.substream(2).substream(k)
        decoy = self.directions[self.decoy_of(k)]
        rows = [
            _unit(
                self.directions[k]
                + self.name_ambiguity * decoy
                + self.synonym_noise * _jitter(s, self.dim)
            )
        ]
        for _ in range(n_good):
            rows.append(_unit(self.directions[k] + self.synonym_noise * _jitter(s, self.dim)))
        rows.append(_unit(0.35 * self.directions[k] + decoy + 0.1 * _jitter(s, self.dim)))
        return np.stack(rows)

    def description_direction(self, k: int, d: int) -> np.ndarray:
        s = self.root.substream(3).substream(k * 97 + d)
        return _unit(np.array(s.gauss_vector(self.dim)))

    def prompt_embedding(self, syn_row: np.ndarray, k: int, d: int, j: int) -> np.ndarray:
        s = self.root.substream(4).substream((k * 97 + d) * 31 + j)
        pull = self.description_pull * self.description_direction(k, d)
        return _unit(syn_row + pull + self.prompt_noise * _jitter(s, self.dim))

    def image_views(
        self, k: int, image_index: int, activations: np.ndarray, garbage: np.ndarray
    ) -> np.ndarray:
        """Full-image row plus one row per crop.

        Crops flagged as garbage (attention outliers) embed as near-pure
        background; the rest mix class signal and background with quality
        following the crop's attention rank.
        """
        s = self.root.substream(5).substream(image_index)
        mate = self.directions[_pair_of(k, self.n_classes)]
        background = _unit(self.background_pull * mate + 0.8 * _jitter(s, self.dim))

        kept = activations[~garbage]
        lo = float(np.min(kept)) if kept.size else 0.0
        hi = float(np.max(kept)) if kept.size else 1.0
        span = hi - lo if hi > lo else 1.0
        frac = np.clip((activations - lo) / span, 0.0, 1.0) ** self.quality_power
        quality = self.quality_floor + (1.0 - self.quality_floor) * frac

        rows = [
            _unit(
                0.8 * self.directions[k]
                + 0.4 * background
                + 0.2 * _jitter(s, self.dim)
            )
        ]
        for i, q in enumerate(quality):
            g = _jitter(s, self.dim)
            if garbage[i]:
                rows.append(_unit(mate + 0.15 * g))
            else:
                rows.append(
                    _unit(
                        q * self.directions[k]
                        + self.background_mix * (1.0 - q) * background
                        + self.view_noise * g
                    )
                )
        return np.stack(rows)


def _attention_outliers(activations: np.ndarray) -> np.ndarray:
    """Crops at or below mu - 2*sigma; the complement of the retention rule."""
    mu = float(np.mean(activations))
    sigma = float(np.std(activations))
    if sigma <= 1e-12:
        return np.zeros(len(activations), dtype=bool)
    return activations <= mu - 2.0 * sigma


def _corner_crop_specs(cx: float, cy: float, count: int, offset: int) -> list[CropSpec]:
    """Tiny crops in the frame corner farthest from the attention blob."""
    fx = 0.88 if cx < 0.5 else 0.02
    fy = 0.88 if cy < 0.5 else 0.02
    specs = []
    for i in range(count):
        specs.append(
            CropSpec(
                x0=fx + 0.015 * (i % 3),
                y0=fy + 0.015 * (i // 3),
                w=0.08,
                h=0.08,
                hflip=False,
                seed_index=offset + i,
            )
        )
    return specs


def make_benchmark_fixture(
    out_dir: str | Path,
    seed: int = 0,
    n_classes: int = 10,
    images_per_class: int = 50,
    dim: int = 32,
    n_crops: int = 100,
    n_corner_crops: int = 6,
    n_good_synonyms: int = 3,
    n_descriptions: int = 2,
    attention_size: int = 24,
    dataset_name: str = "gaussian-benchmark",
    **world_kwargs,
) -> Path:
    """Class-paired Gaussian dataset sized for the end-to-end suite."""
    out_dir = Path(out_dir)
    world = _SyntheticWorld(seed, dim, n_classes, **world_kwargs)

    prompt_rows: list[np.ndarray] = []
    classes = []
    for k in range(n_classes):
        syn_rows = world.synonym_embeddings(k, n_good_synonyms)
        texts = [f"name-{k}"] + [f"syn-{k}-{j}" for j in range(n_good_synonyms)] + [f"odd-{k}"]
        entries = []
        for j, text in enumerate(texts):
            entries.append(SynonymEntry(text, len(prompt_rows), is_original=(j == 0)))
            prompt_rows.append(syn_rows[j])
        descriptions = []
        for d in range(n_descriptions):
            start = len(prompt_rows)
            for j in range(len(texts)):
                prompt_rows.append(world.prompt_embedding(syn_rows[j], k, d, j))
            descriptions.append(
                DescriptionEntry(f"description-{k}-{d}", (start, len(prompt_rows)))
            )
        classes.append(
            ClassRecord(
                class_id=f"class-{k}",
                given_name=f"name-{k}",
                synonyms=entries,
                descriptions=descriptions,
            )
        )
    _write_embeddings(np.stack(prompt_rows), out_dir / "prompts.cpeb", "prompts")

    images = []
    image_index = 0
    (out_dir / "attention").mkdir(parents=True, exist_ok=True)
    for k in range(n_classes):
        for _ in range(images_per_class):
            image_id = f"img-{image_index:04d}"
            blob_stream = world.root.substream(6).substream(image_index)
            attention, cx, cy = _gaussian_blob(blob_stream, attention_size)
            crop_seed = blob_stream.next_u64() % (1 << 32)
            n_main = max(n_crops - n_corner_crops, 0)
            specs = generate_crop_specs(crop_seed, n_main, scale=(0.5, 1.0))
            specs = specs + _corner_crop_specs(cx, cy, min(n_corner_crops, n_crops), n_main)
            attention_path = out_dir / "attention" / f"{image_id}.cpea"
            save_attention_map(attention, attention_path)
            # score against the file as written, so float32 storage cannot
            # move a crop across the outlier boundary
            stored = load_attention_map(attention_path)
            activations = np.array([mean_activation(stored, sp) for sp in specs])
            garbage = _attention_outliers(activations)
            rows = world.image_views(k, image_index, activations, garbage)
            _write_embeddings(rows, out_dir / "views" / f"{image_id}.cpeb", image_id)
            images.append(
                ImageRecord(
                    image_id=image_id,
                    true_class_id=f"class-{k}",
                    views_file=f"views/{image_id}.cpeb",
                    attention_file=f"attention/{image_id}.cpea",
                    crop_specs=specs,
                )
            )
            image_index += 1

    manifest = Manifest(dataset_name, "prompts.cpeb", classes, images, out_dir)
    path = out_dir / "manifest.json"
    save_manifest(manifest, path)
    return path


def make_mini_fixture(out_dir: str | Path, seed: int = 7, **overrides) -> dict[str, Path]:
    """Compact 5-class, 200-image dataset at text-encoder width.

    Ships two manifests over the same image files: the full one with
    synonyms and descriptions, and a template-only baseline whose textual
    side is a single bare prompt per class.  Class names are polysemous
    here, so the baseline inherits their ambiguity while the enriched
    pipeline can average it away.
    """
    out_dir = Path(out_dir)
    kwargs = dict(
        n_classes=5,
        images_per_class=40,
        dim=512,
        n_crops=24,
        n_corner_crops=3,
        n_good_synonyms=3,
        n_descriptions=3,
        attention_size=16,
        dataset_name="mini",
        name_ambiguity=0.98,
        synonym_noise=0.3,
    )
    kwargs.update(overrides)
    manifest_path = make_benchmark_fixture(out_dir, seed=seed, **kwargs)

    full = load_manifest(manifest_path)
    prompt_rows = load_embedding_set(full.resolve(full.text_embedding_file)).as_float64()

    base_rows = []
    base_classes = []
    for record in full.classes:
        original = next(s for s in record.synonyms if s.is_original)
        row = len(base_rows)
        base_rows.append(prompt_rows[original.row])
        base_classes.append(
            ClassRecord(
                class_id=record.class_id,
                given_name=record.given_name,
                synonyms=[SynonymEntry(original.text, row, True)],
                # the bare template prompt reuses the name embedding
                descriptions=[DescriptionEntry("", (row, row + 1))],
            )
        )
    _write_embeddings(np.stack(base_rows), out_dir / "prompts_baseline.cpeb", "prompts-baseline")

    baseline = Manifest(
        dataset_name="mini-baseline",
        text_embedding_file="prompts_baseline.cpeb",
        classes=base_classes,
        images=full.images,
        base_dir=out_dir,
    )
    baseline_path = out_dir / "manifest_baseline.json"
    save_manifest(baseline, baseline_path)
    return {"manifest": manifest_path, "baseline_manifest": baseline_path}
