"""Dataset manifest: the JSON sidecar tying classes, prompts, and view files together.

The manifest is the only piece of mutable-looking state in a dataset and it is
read-only here.  Paths inside it are resolved relative to the manifest's own
directory so fixture folders relocate freely.  Unknown JSON keys are ignored
to keep old readers working against newer writers.

Layout:

    {
      "dataset_name": "...",
      "text_embedding_file": "prompts.cpeb",
      "classes": [
        {"class_id": "...", "given_name": "...",
         "synonyms":     [{"text": "...", "row": 0, "is_original": true}, ...],
         "descriptions": [{"text": "...", "rows": [12, 18]}, ...]},
        ...
      ],
      "images": [
        {"image_id": "...", "true_class_id": "...",
         "views_file": "views/....cpeb", "attention_file": "attention/....cpea",
         "crop_specs": [[x0, y0, w, h, hflip], ...]},
        ...
      ]
    }

Synonym `row` points at the embedding of the bare synonym text (used for the
ambiguity filter).  A description's `rows` half-open range holds one prompt
row per listed synonym, in the class's synonym order; an empty-text
description entry stores the bare-template prompts used when a class has no
real descriptions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError
from .formats import EmbeddingSet
from .views import CropSpec


@dataclass
class SynonymEntry:
    text: str
    row: int
    is_original: bool = False


@dataclass
class DescriptionEntry:
    text: str
    rows: tuple[int, int]  # half-open range into the text embedding file


@dataclass
class ClassRecord:
    class_id: str
    given_name: str
    synonyms: list[SynonymEntry]
    descriptions: list[DescriptionEntry] = field(default_factory=list)


@dataclass
class ImageRecord:
    image_id: str
    true_class_id: str
    views_file: str
    attention_file: str
    crop_specs: list[CropSpec] = field(default_factory=list)


@dataclass
class Manifest:
    dataset_name: str
    text_embedding_file: str
    classes: list[ClassRecord]
    images: list[ImageRecord]
    base_dir: Path = field(default_factory=Path)

    def resolve(self, rel: str) -> Path:
        return self.base_dir / rel

    def class_by_id(self, class_id: str) -> ClassRecord:
        for record in self.classes:
            if record.class_id == class_id:
                return record
        raise DataError(f"unknown class id {class_id!r}")


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise DataError(f"manifest {context}: missing key {key!r}")
    return data[key]


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"manifest {path} must hold a JSON object")

    classes = []
    for cd in _require(data, "classes", "top level"):
        class_id = str(_require(cd, "class_id", "class record"))
        synonyms = [
            SynonymEntry(
                text=str(_require(sd, "text", f"class {class_id}")),
                row=int(_require(sd, "row", f"class {class_id}")),
                is_original=bool(sd.get("is_original", False)),
            )
            for sd in _require(cd, "synonyms", f"class {class_id}")
        ]
        if not any(s.is_original for s in synonyms):
            raise DataError(f"class {class_id!r} has no is_original synonym entry")
        descriptions = [
            DescriptionEntry(
                text=str(dd.get("text", "")),
                rows=(int(dd["rows"][0]), int(dd["rows"][1])),
            )
            for dd in cd.get("descriptions", [])
        ]
        classes.append(
            ClassRecord(
                class_id=class_id,
                given_name=str(cd.get("given_name", class_id)),
                synonyms=synonyms,
                descriptions=descriptions,
            )
        )
    if not classes:
        raise DataError(f"manifest {path} lists no classes")

    class_ids = {c.class_id for c in classes}
    images = []
    for idx, im in enumerate(_require(data, "images", "top level")):
        image_id = str(im.get("image_id", f"image-{idx}"))
        true_class = str(_require(im, "true_class_id", f"image {image_id}"))
        if true_class not in class_ids:
            raise DataError(
                f"image {image_id!r} references unknown class {true_class!r}"
            )
        specs = [
            CropSpec.from_json(arr, seed_index=i)
            for i, arr in enumerate(im.get("crop_specs", []))
        ]
        images.append(
            ImageRecord(
                image_id=image_id,
                true_class_id=true_class,
                views_file=str(_require(im, "views_file", f"image {image_id}")),
                attention_file=str(_require(im, "attention_file", f"image {image_id}")),
                crop_specs=specs,
            )
        )

    return Manifest(
        dataset_name=str(data.get("dataset_name", path.stem)),
        text_embedding_file=str(_require(data, "text_embedding_file", "top level")),
        classes=classes,
        images=images,
        base_dir=path.parent,
    )


def validate_rows(manifest: Manifest, text_set: EmbeddingSet) -> None:
    """Check every synonym/description row reference against the prompt file."""
    n = text_set.rows
    for record in manifest.classes:
        for entry in record.synonyms:
            if not 0 <= entry.row < n:
                raise DataError(
                    f"class {record.class_id!r}: synonym {entry.text!r} row "
                    f"{entry.row} out of bounds for {n} rows"
                )
        for desc in record.descriptions:
            start, stop = desc.rows
            if not (0 <= start <= stop <= n):
                raise DataError(
                    f"class {record.class_id!r}: description rows {desc.rows} "
                    f"out of bounds for {n} rows"
                )
            if stop - start != len(record.synonyms):
                raise DataError(
                    f"class {record.class_id!r}: description {desc.text!r} has "
                    f"{stop - start} rows for {len(record.synonyms)} synonyms"
                )


def manifest_to_dict(manifest: Manifest) -> dict:
    return {
        "dataset_name": manifest.dataset_name,
        "text_embedding_file": manifest.text_embedding_file,
        "classes": [
            {
                "class_id": c.class_id,
                "given_name": c.given_name,
                "synonyms": [
                    {"text": s.text, "row": s.row, "is_original": s.is_original}
                    for s in c.synonyms
                ],
                "descriptions": [
                    {"text": d.text, "rows": [d.rows[0], d.rows[1]]}
                    for d in c.descriptions
                ],
            }
            for c in manifest.classes
        ],
        "images": [
            {
                "image_id": im.image_id,
                "true_class_id": im.true_class_id,
                "views_file": im.views_file,
                "attention_file": im.attention_file,
                "crop_specs": [spec.to_json() for spec in im.crop_specs],
            }
            for im in manifest.images
        ],
    }


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    path = Path(path)
    path.write_text(
        json.dumps(manifest_to_dict(manifest), indent=1) + "\n", encoding="utf-8"
    )
