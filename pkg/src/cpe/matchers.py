"""Set-to-set classifiers with the scikit-learn estimator interface.

`fit` takes the per-class textual prompt sets (ClassTextualSet), `predict` and
`predict_proba` take visual view sets.  All three matchers are stateless per
image: adaptation in `AdaptiveShiftMatcher` is episodic, so predictions never
depend on the order of the inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from . import adaptation, transport
from .errors import DataError
from .geometry import pairwise_similarity, softmax
from .synonyms import ClassTextualSet
from .validation import as_float_matrix
from .views import ViewSet


def _as_view_matrix(x) -> np.ndarray:
    if isinstance(x, ViewSet):
        return x.embeddings
    return as_float_matrix(x, "view set")


class _SetMatcherBase(BaseEstimator, ClassifierMixin):
    """Shared fit/predict plumbing; subclasses score one view set at a time."""

    def fit(self, class_sets: Sequence[ClassTextualSet], y=None):
        if len(class_sets) == 0:
            raise DataError("fit needs at least one class textual set")
        ids = [ts.class_id for ts in class_sets]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate class ids in textual sets")
        dims = {ts.embeddings.shape[1] for ts in class_sets}
        if len(dims) != 1:
            raise DataError(f"textual sets disagree on dim: {sorted(dims)}")
        self.textual_sets_ = list(class_sets)
        self.classes_ = np.asarray(ids, dtype=object)
        self.centroids_ = adaptation.class_centroids(class_sets)
        self.n_features_in_ = dims.pop()
        return self

    def _check_fitted(self):
        if not hasattr(self, "textual_sets_"):
            raise NotFittedError(
                f"{type(self).__name__} is not fitted; call fit(class_sets) first"
            )

    def _score_one(self, views: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_proba(self, view_sets) -> np.ndarray:
        self._check_fitted()
        if isinstance(view_sets, (ViewSet, np.ndarray)):
            view_sets = [view_sets]
        out = np.empty((len(view_sets), len(self.classes_)))
        for i, vs in enumerate(view_sets):
            views = _as_view_matrix(vs)
            if views.shape[1] != self.n_features_in_:
                raise DataError(
                    f"view set {i} has dim {views.shape[1]}, "
                    f"expected {self.n_features_in_}"
                )
            out[i] = self._score_one(views)
        return out

    def predict(self, view_sets) -> np.ndarray:
        proba = self.predict_proba(view_sets)
        return self.classes_[np.argmax(proba, axis=1)]


class PointwiseMatcher(_SetMatcherBase):
    """Cosine of the mean view against each class centroid, softmaxed over tau.

    This is the classic single-vector zero-shot scorer and the control the
    other matchers are measured against.
    """

    def __init__(self, tau: float = 0.01):
        self.tau = tau

    def _score_one(self, views: np.ndarray) -> np.ndarray:
        v_bar = np.mean(views, axis=0)
        sims = pairwise_similarity(v_bar[None, :], self.centroids_)[0]
        return softmax(sims / self.tau)


class TransportMatcher(_SetMatcherBase):
    """Entropic-transport alignment of the view set against each prompt set."""

    def __init__(
        self,
        tau: float = 0.01,
        epsilon: float = 0.1,
        sinkhorn_iters: int = 100,
        sinkhorn_tol: float = 1e-6,
        tau_w: float = 0.5,
        weights: str = "entropy",
    ):
        self.tau = tau
        self.epsilon = epsilon
        self.sinkhorn_iters = sinkhorn_iters
        self.sinkhorn_tol = sinkhorn_tol
        self.tau_w = tau_w
        self.weights = weights

    def _score_one(self, views: np.ndarray) -> np.ndarray:
        view_set = ViewSet(views, np.arange(1, views.shape[0]))
        return transport.classify_ot(view_set, self.textual_sets_, self).probabilities


class AdaptiveShiftMatcher(_SetMatcherBase):
    """One entropy-descent step on per-class shifts, then centroid scoring.

    Shifts start from zero for every view set (episodic), take exactly one
    gradient step on the confident views' marginal entropy, and score the
    mean view against the shifted centroids.
    """

    def __init__(
        self,
        tau: float = 0.01,
        tta_lr: float = 5e-4,
        tta_fraction: float = 0.1,
        renormalize_shifted: bool = False,
    ):
        self.tau = tau
        self.tta_lr = tta_lr
        self.tta_fraction = tta_fraction
        self.renormalize_shifted = renormalize_shifted

    def _score_one(self, views: np.ndarray) -> np.ndarray:
        shifts = adaptation.ShiftState.zeros(
            len(self.classes_), self.n_features_in_, self.tta_lr
        )
        shifts = adaptation.tta_step(views, self.centroids_, shifts, self)
        scores = adaptation.infer_tta(
            views, self.textual_sets_, shifts, self.tau, self.renormalize_shifted
        )
        return scores.probabilities


MATCHER_CLASSES = {
    "pointwise": PointwiseMatcher,
    "ot": TransportMatcher,
    "tta": AdaptiveShiftMatcher,
}


def matcher_from_config(config) -> _SetMatcherBase:
    """Instantiate the configured matcher with only the parameters it uses."""
    if config.matcher == "pointwise":
        return PointwiseMatcher(tau=config.tau)
    if config.matcher == "ot":
        return TransportMatcher(
            tau=config.tau,
            epsilon=config.epsilon,
            sinkhorn_iters=config.sinkhorn_iters,
            sinkhorn_tol=config.sinkhorn_tol,
            tau_w=config.tau_w,
            weights=config.weights,
        )
    if config.matcher == "tta":
        return AdaptiveShiftMatcher(
            tau=config.tau,
            tta_lr=config.tta_lr,
            tta_fraction=config.tta_fraction,
            renormalize_shifted=config.renormalize_shifted,
        )
    raise DataError(f"unknown matcher {config.matcher!r}")
