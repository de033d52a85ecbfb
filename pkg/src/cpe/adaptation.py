"""Per-image adaptation of class centroids by marginal entropy descent.

Each class centroid gets an additive shift vector, zeroed for every new image.
The views' class distributions are computed against the shifted centroids, the
most confident fraction is kept, and one gradient step on the entropy of their
mean distribution updates the shifts before the final centroid-vs-mean-view
scoring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .geometry import entropy, softmax
from .synonyms import ClassTextualSet
from .transport import ClassScores
from .validation import as_float_matrix
from .views import ViewSet


@dataclass
class ShiftState:
    """One additive shift per class; starts at zero for each image."""

    shifts: np.ndarray  # (n_classes, dim)
    learning_rate: float

    def __post_init__(self):
        self.shifts = np.asarray(self.shifts, dtype=np.float64)
        if self.shifts.ndim != 2:
            raise DataError("shifts must be a (classes, dim) array")
        if not np.all(np.isfinite(self.shifts)):
            raise DataError("shifts contain non-finite values")
        if self.learning_rate <= 0.0:
            raise DataError("learning rate must be > 0")

    @classmethod
    def zeros(cls, n_classes: int, dim: int, learning_rate: float) -> "ShiftState":
        return cls(np.zeros((n_classes, dim)), learning_rate)


def class_centroids(textual_sets: Sequence[ClassTextualSet]) -> np.ndarray:
    """Mean prompt embedding per class, deliberately left unnormalized."""
    if len(textual_sets) == 0:
        raise DataError("no textual sets")
    return np.stack([ts.centroid for ts in textual_sets])


def _effective_centroids(
    centroids: np.ndarray, shifts: np.ndarray, renormalize: bool
) -> np.ndarray:
    shifted = centroids + shifts
    if renormalize:
        norms = np.linalg.norm(shifted, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise DataError("shifted centroid collapsed to zero norm")
        shifted = shifted / norms
    return shifted


def view_distributions(
    views: np.ndarray | ViewSet,
    centroids: np.ndarray,
    shifts: ShiftState,
    tau: float,
    renormalize: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Class distribution of every view against shifted centroids.

    Logits are plain dot products over tau; the shifted centroid is used as
    printed, without renormalization, unless `renormalize` asks for it.
    Returns (probs [views x classes], entropies [views]).
    """
    v = views.embeddings if isinstance(views, ViewSet) else views
    v = as_float_matrix(v, "views")
    centroids = as_float_matrix(centroids, "centroids")
    if tau <= 0.0:
        raise DataError("tau must be > 0")
    shifted = _effective_centroids(centroids, shifts.shifts, renormalize)
    logits = v @ shifted.T / tau
    probs = softmax(logits)
    return probs, entropy(probs, axis=1)


def select_confident(entropies: np.ndarray, fraction: float) -> np.ndarray:
    """Indices of the lowest-entropy distributions, ascending.

    Keeps m = max(1, ceil(fraction * count)); equal entropies resolve to the
    lower index via the stable sort.
    """
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"fraction must be in (0, 1], got {fraction}")
    entropies = np.asarray(entropies, dtype=np.float64)
    m = max(1, math.ceil(fraction * len(entropies)))
    chosen = np.argsort(entropies, kind="stable")[:m]
    return np.sort(chosen)


def marginal_entropy(probs: np.ndarray, selected: np.ndarray) -> float:
    marginal = np.mean(probs[selected], axis=0)
    return float(entropy(marginal))


def entropy_shift_gradient(
    views: np.ndarray,
    probs: np.ndarray,
    selected: np.ndarray,
    centroids: np.ndarray,
    shifts: np.ndarray,
    tau: float,
    renormalize: bool = False,
) -> np.ndarray:
    """Analytic gradient of the selected views' marginal entropy w.r.t. shifts.

    With marginal p_bar = mean_i p_i over the selected views and loss
    L = -sum_k p_bar_k log p_bar_k, chain through the softmax gives

        dL/dl_k = (1/m) * sum_i p_ik * (g_k - g . p_i) * dz_ik/dl_k

    where g_k = -(log p_bar_k + 1) and z_ik is view i's logit for class k.
    Without renormalization dz_ik/dl_k = v_i / tau; with it the Jacobian of
    the normalization projects v_i off the shifted-centroid direction.
    """
    v_sel = views[selected]
    p_sel = probs[selected]
    m = len(selected)
    p_bar = np.mean(p_sel, axis=0)
    with np.errstate(divide="ignore"):
        g = -(np.log(p_bar) + 1.0)
    g = np.where(np.isfinite(g), g, 0.0)  # p_bar_k = 0 contributes nothing

    # coef[i, k] = p_ik * (g_k - g . p_i)
    coef = p_sel * (g[None, :] - (p_sel @ g)[:, None])
    if not renormalize:
        return coef.T @ v_sel / (tau * m)

    shifted = centroids + shifts
    norms = np.linalg.norm(shifted, axis=1, keepdims=True)
    unit = shifted / norms
    grad = np.empty_like(shifted)
    for k in range(shifted.shape[0]):
        # d(unit_k . v)/dl_k = (v - unit_k (unit_k . v)) / ||shifted_k||
        proj = v_sel - np.outer(v_sel @ unit[k], unit[k])
        grad[k] = coef[:, k] @ proj / (norms[k, 0] * tau * m)
    return grad


def tta_step(
    view_set: ViewSet | np.ndarray,
    centroids: np.ndarray,
    shifts: ShiftState,
    config,
) -> ShiftState:
    """Exactly one descent step on the confident views' marginal entropy."""
    views = view_set.embeddings if isinstance(view_set, ViewSet) else view_set
    views = as_float_matrix(views, "views")
    probs, entropies = view_distributions(
        views, centroids, shifts, config.tau, config.renormalize_shifted
    )
    selected = select_confident(entropies, config.tta_fraction)
    grad = entropy_shift_gradient(
        views, probs, selected, centroids, shifts.shifts,
        config.tau, config.renormalize_shifted,
    )
    return ShiftState(shifts.shifts - shifts.learning_rate * grad, shifts.learning_rate)


def infer_tta(
    view_set: ViewSet | np.ndarray,
    textual_sets: Sequence[ClassTextualSet],
    shifts: ShiftState,
    tau: float,
    renormalize: bool = False,
) -> ClassScores:
    """Score classes by shifted centroid against the mean view embedding."""
    views = view_set.embeddings if isinstance(view_set, ViewSet) else view_set
    views = as_float_matrix(views, "views")
    if tau <= 0.0:
        raise DataError("tau must be > 0")
    centroids = class_centroids(textual_sets)
    shifted = _effective_centroids(centroids, shifts.shifts, renormalize)
    v_bar = np.mean(views, axis=0)
    scores = shifted @ v_bar / tau
    return ClassScores(
        [ts.class_id for ts in textual_sets], scores, softmax(scores)
    )
