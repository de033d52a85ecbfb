"""Crop specifications, attention scoring, and two-sigma view selection.

The engine never touches pixels: crops exist as relative-coordinate specs, the
matching embeddings are produced elsewhere, and selection works purely on the
attention mass inside each spec's rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .rng import SplitStream
from .validation import as_float_matrix, as_float_vector


@dataclass
class CropSpec:
    """Relative crop rectangle plus horizontal-flip flag."""

    x0: float
    y0: float
    w: float
    h: float
    hflip: bool
    seed_index: int = 0

    def __post_init__(self):
        if not (self.w > 0.0 and self.h > 0.0):
            raise DataError(f"crop spec {self.seed_index}: non-positive extent")
        if self.x0 < 0.0 or self.y0 < 0.0 or self.x0 + self.w > 1.0 + 1e-12 or self.y0 + self.h > 1.0 + 1e-12:
            raise DataError(f"crop spec {self.seed_index}: rectangle leaves the unit square")

    def to_json(self) -> list:
        return [self.x0, self.y0, self.w, self.h, bool(self.hflip)]

    @classmethod
    def from_json(cls, arr: Sequence, seed_index: int = 0) -> "CropSpec":
        if len(arr) != 5:
            raise DataError(f"crop spec array must have 5 entries, got {len(arr)}")
        return cls(
            float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]),
            bool(arr[4]), seed_index,
        )


@dataclass
class ActivationStats:
    per_view_mean: np.ndarray
    mu: float
    sigma: float
    threshold: float


@dataclass
class ViewSet:
    """Embeddings of the full image (row 0) and the retained crops (rows 1..)."""

    embeddings: np.ndarray
    retained_indices: np.ndarray  # crop numbers in {1..N}, strictly increasing

    def __post_init__(self):
        self.embeddings = as_float_matrix(self.embeddings, "view embeddings")
        self.retained_indices = np.asarray(self.retained_indices, dtype=np.int64)
        if self.embeddings.shape[0] != len(self.retained_indices) + 1:
            raise DataError(
                f"view set has {self.embeddings.shape[0]} rows but "
                f"{len(self.retained_indices)} retained indices"
            )
        if len(self.retained_indices) > 0:
            if self.retained_indices[0] < 1 or np.any(np.diff(self.retained_indices) <= 0):
                raise DataError("retained indices must be strictly increasing and >= 1")

    @property
    def size(self) -> int:
        return self.embeddings.shape[0]


def generate_crop_specs(
    seed: int,
    n: int,
    scale: tuple[float, float] = (0.2, 1.0),
    aspect: tuple[float, float] = (0.75, 4.0 / 3.0),
) -> list[CropSpec]:
    """n deterministic random-resized-crop specs for one image.

    Spec i is drawn from its own (seed, i) stream, so any subset can be
    regenerated independently and worker scheduling cannot reorder draws.
    Draw order per spec: area fraction, aspect ratio, x0, y0, flip.  Width and
    height are clipped to the unit square, which skews extreme aspects but
    keeps every rectangle valid.
    """
    if n < 1:
        raise DataError("need n >= 1 crop specs")
    lo, hi = scale
    if not (0.0 < lo <= hi <= 1.0):
        raise DataError(f"invalid crop scale range {scale}")
    specs = []
    root = SplitStream(seed)
    for i in range(n):
        s = root.substream(i)
        area = s.uniform(lo, hi)
        ratio = s.uniform(aspect[0], aspect[1])
        w = min(math.sqrt(area * ratio), 1.0)
        h = min(math.sqrt(area / ratio), 1.0)
        x0 = s.uniform(0.0, 1.0 - w)
        y0 = s.uniform(0.0, 1.0 - h)
        hflip = s.uniform() < 0.5
        specs.append(CropSpec(x0, y0, w, h, hflip, seed_index=i))
    return specs


def mean_activation(attention: np.ndarray, spec: CropSpec) -> float:
    """Mean attention over the crop's pixel rectangle.

    Relative coordinates scale to half-open pixel ranges with a minimum size
    of one pixel in each direction; flipping is irrelevant to a mean.
    """
    attention = as_float_matrix(attention, "attention map")
    height, width = attention.shape
    x_lo = int(math.floor(spec.x0 * width))
    y_lo = int(math.floor(spec.y0 * height))
    x_hi = min(width, max(x_lo + 1, int(math.floor((spec.x0 + spec.w) * width))))
    y_hi = min(height, max(y_lo + 1, int(math.floor((spec.y0 + spec.h) * height))))
    x_lo = min(x_lo, width - 1)
    y_lo = min(y_lo, height - 1)
    return float(np.mean(attention[y_lo:y_hi, x_lo:x_hi]))


def activation_stats(activations) -> ActivationStats:
    """Population mean/stddev and the two-sigma lower threshold."""
    values = as_float_vector(activations, "activations")
    mu = float(np.mean(values))
    sigma = float(np.std(values))  # population form: divide by N
    return ActivationStats(values, mu, sigma, mu - 2.0 * sigma)


def select_views(activations) -> np.ndarray:
    """Crop numbers (1-based, matching view-file rows) surviving the two-sigma rule.

    A crop stays when its mean activation is strictly above mu - 2*sigma.
    With sigma = 0 all activations are equal and everything stays; applying
    the strict rule there would discard every crop.
    """
    stats = activation_stats(activations)
    if stats.sigma == 0.0:
        keep = np.arange(len(stats.per_view_mean))
    else:
        keep = np.nonzero(stats.per_view_mean > stats.threshold)[0]
    return keep + 1


def build_view_set(
    full_embedding: np.ndarray,
    crop_embeddings: np.ndarray,
    retained: Sequence[int],
) -> ViewSet:
    """Assemble [full image, crops at `retained`] in order; `retained` is 1-based."""
    full = as_float_vector(full_embedding, "full-image embedding")
    crops = as_float_matrix(crop_embeddings, "crop embeddings")
    n = crops.shape[0]
    retained = np.asarray(list(retained), dtype=np.int64)
    if len(retained) > 0 and (retained.min() < 1 or retained.max() > n):
        raise DataError(
            f"retained crop index out of range 1..{n}: {retained.tolist()}"
        )
    rows = np.vstack([full[None, :], crops[retained - 1]]) if len(retained) else full[None, :]
    return ViewSet(rows, retained)
