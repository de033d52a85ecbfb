"""Entropic optimal transport between a visual set and per-class textual sets.

The solver is a log-domain Sinkhorn: dual potentials are tracked additively
and the plan is only exponentiated at the end of each sweep, so small
regularization strengths do not underflow the scaling factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .geometry import entropy, logsumexp, pairwise_similarity, softmax
from .synonyms import ClassTextualSet
from .validation import as_float_matrix, check_same_dim, check_weights
from .views import ViewSet


@dataclass
class TransportProblem:
    """Cost matrix with row (visual) and column (textual) weights.

    Rows are visual elements with weights `a`, columns are textual elements
    with weights `b`; both weight vectors live on the probability simplex,
    although single zero entries are allowed and force an empty plan row or
    column.
    """

    cost: np.ndarray
    a: np.ndarray
    b: np.ndarray
    epsilon: float = 0.1
    max_iters: int = 100
    tol: float = 1e-6

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=np.float64)
        if np.any(np.isnan(self.cost)):
            raise DataError("cost matrix contains NaN")
        self.cost = as_float_matrix(self.cost, "cost matrix")
        if np.any(self.cost < 0.0):
            raise DataError("cost matrix has negative entries")
        self.a = check_weights(self.a, "row weights a")
        self.b = check_weights(self.b, "column weights b")
        if self.cost.shape != (len(self.a), len(self.b)):
            raise DataError(
                f"cost shape {self.cost.shape} does not match weights "
                f"({len(self.a)}, {len(self.b)})"
            )
        if self.epsilon <= 0.0:
            raise DataError("epsilon must be > 0")
        if self.max_iters < 1:
            raise DataError("max_iters must be >= 1")


@dataclass
class TransportPlan:
    plan: np.ndarray
    converged: bool
    iterations_used: int

    def marginal_violation(self, a: np.ndarray, b: np.ndarray) -> float:
        row = np.max(np.abs(self.plan.sum(axis=1) - a))
        col = np.max(np.abs(self.plan.sum(axis=0) - b))
        return float(max(row, col))


@dataclass
class ClassScores:
    class_ids: list[str]
    scores: np.ndarray
    probabilities: np.ndarray

    @property
    def prediction(self) -> str:
        # ties resolve to the lower class index
        return self.class_ids[int(np.argmax(self.probabilities))]


def sinkhorn(problem: TransportProblem) -> TransportPlan:
    """Alternating-scaling solution of the entropically regularized problem.

    Returns diag(u) K diag(v) with K = exp(-C/eps) after the marginal
    violation drops below `tol` or `max_iters` sweeps pass, whichever comes
    first; `converged` records which one it was.
    """
    eps = problem.epsilon
    neg_cost = -problem.cost / eps
    with np.errstate(divide="ignore"):
        log_a = np.log(problem.a)
        log_b = np.log(problem.b)

    f = np.zeros(len(problem.a))
    g = np.zeros(len(problem.b))
    # zero-weight rows/cols pin their potential at -inf, emptying the plan line
    f = np.where(np.isfinite(log_a), f, -np.inf)
    g = np.where(np.isfinite(log_b), g, -np.inf)

    plan = np.exp(f[:, None] + g[None, :] + neg_cost)
    converged = False
    iterations = 0
    for iterations in range(1, problem.max_iters + 1):
        f = log_a - logsumexp(g[None, :] + neg_cost, axis=1)
        g = log_b - logsumexp(f[:, None] + neg_cost, axis=0)
        plan = np.exp(f[:, None] + g[None, :] + neg_cost)
        violation = max(
            float(np.max(np.abs(plan.sum(axis=1) - problem.a))),
            float(np.max(np.abs(plan.sum(axis=0) - problem.b))),
        )
        if violation < problem.tol:
            converged = True
            break
    return TransportPlan(plan, converged, iterations)


def cost_matrix(visual: np.ndarray | ViewSet, textual: np.ndarray | ClassTextualSet) -> np.ndarray:
    """1 - cosine similarity of every view against every prompt, in [0, 2]."""
    v = visual.embeddings if isinstance(visual, ViewSet) else visual
    t = textual.embeddings if isinstance(textual, ClassTextualSet) else textual
    v = as_float_matrix(v, "visual embeddings")
    t = as_float_matrix(t, "textual embeddings")
    check_same_dim(v, t, "visual embeddings", "textual embeddings")
    return np.clip(1.0 - pairwise_similarity(v, t), 0.0, 2.0)


def importance_weights(
    elements: np.ndarray, references: np.ndarray, tau_w: float
) -> np.ndarray:
    """Entropy-based simplex weights for a set of elements.

    Each element's similarity profile over the references is softmaxed at
    temperature tau_w; elements whose profile is decisive (low entropy) get
    more weight through a second softmax of -entropy/tau_w.  A single element
    always receives weight 1.
    """
    elements = as_float_matrix(elements, "elements")
    if tau_w <= 0.0:
        raise DataError("tau_w must be > 0")
    if elements.shape[0] == 1:
        return np.ones(1)
    references = as_float_matrix(references, "references")
    sims = pairwise_similarity(elements, references)
    q = softmax(sims / tau_w)
    h = entropy(q, axis=1)
    return softmax(-h / tau_w)


def transported_similarity(plan: np.ndarray, cost: np.ndarray) -> float:
    """Total similarity moved by the plan: sum of plan * (1 - cost)."""
    return float(np.sum(plan * (1.0 - cost)))


def classify_ot(
    view_set: ViewSet,
    textual_sets: Sequence[ClassTextualSet],
    config,
) -> ClassScores:
    """Score every class by solving one transport problem per class.

    The visual weights are shared across classes (references are the
    normalized per-class centroids); each class's textual weights use the
    views as references.  Class probabilities are a softmax of transported
    similarity over temperature tau.
    """
    if len(textual_sets) == 0:
        raise DataError("classify_ot: no classes")
    views = view_set.embeddings
    n_views = views.shape[0]

    if config.weights == "entropy" and len(textual_sets) >= 2:
        centroids = np.stack([ts.centroid for ts in textual_sets])
        a = importance_weights(views, centroids, config.tau_w)
    elif config.weights in ("entropy", "uniform"):
        a = np.full(n_views, 1.0 / n_views)
    else:
        raise DataError(f"unknown weighting scheme {config.weights!r}")

    scores = np.empty(len(textual_sets))
    for k, ts in enumerate(textual_sets):
        cost = cost_matrix(view_set, ts)
        m = ts.embeddings.shape[0]
        if config.weights == "entropy" and m >= 2:
            b = importance_weights(ts.embeddings, views, config.tau_w)
        else:
            b = np.full(m, 1.0 / m)
        plan = sinkhorn(
            TransportProblem(
                cost, a, b,
                epsilon=config.epsilon,
                max_iters=config.sinkhorn_iters,
                tol=config.sinkhorn_tol,
            )
        )
        scores[k] = transported_similarity(plan.plan, cost)

    probabilities = softmax(scores / config.tau)
    return ClassScores([ts.class_id for ts in textual_sets], scores, probabilities)
