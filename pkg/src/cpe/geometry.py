"""Cosine geometry and small numeric helpers shared across the package."""

from __future__ import annotations

import numpy as np

from .errors import DataError


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm.

    Raises DataError("degenerate embedding") for the zero vector; a zero
    embedding has no direction and silently passing one through would poison
    every similarity downstream.
    """
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise DataError("degenerate embedding: zero or non-finite norm")
    return v / norm


def l2_normalize_rows(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise DataError("degenerate embedding: zero or non-finite row norm")
    return m / norms


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    u = l2_normalize(u)
    v = l2_normalize(v)
    return float(np.clip(u @ v, -1.0, 1.0))


def pairwise_similarity(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine similarity of every row of `a` against every row of `b` (n x m)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise DataError(
            f"dimension mismatch: {a.shape[1]} vs {b.shape[1]} columns"
        )
    sims = l2_normalize_rows(a) @ l2_normalize_rows(b).T
    return np.clip(sims, -1.0, 1.0)


def softmax(x: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def logsumexp(x: np.ndarray, axis: int) -> np.ndarray:
    """Stable log-sum-exp that propagates all-(-inf) slices as -inf."""
    x = np.asarray(x, dtype=np.float64)
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis)) + np.squeeze(m, axis=axis)
    return out


def entropy(p: np.ndarray, axis: int = -1) -> np.ndarray:
    """Shannon entropy, natural log; 0 * log 0 treated as 0."""
    p = np.asarray(p, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log(p), 0.0)
    return np.sum(terms, axis=axis)
