"""Input validation helpers used at public API boundaries.

All helpers raise DataError with a message naming the offending argument, so
failures surface with context instead of numpy shape errors deep in a matcher.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError

UNIT_NORM_ATOL = 1e-5


def as_float_matrix(x, name: str) -> np.ndarray:
    """Coerce to a finite 2-D float64 array; 1-D input becomes a single row."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2:
        raise DataError(f"{name}: expected a 2-D array, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DataError(f"{name}: empty array with shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DataError(f"{name}: contains non-finite values")
    return m


def as_float_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 1:
        raise DataError(f"{name}: expected a nonempty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{name}: contains non-finite values")
    return v


def check_unit_rows(m: np.ndarray, name: str, atol: float = UNIT_NORM_ATOL) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1)
    bad = np.abs(norms - 1.0) > atol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DataError(
            f"{name}: row {i} is not unit-normalized (norm={norms[i]:.6g})"
        )
    return m


def check_same_dim(a: np.ndarray, b: np.ndarray, name_a: str, name_b: str) -> None:
    if a.shape[1] != b.shape[1]:
        raise DataError(
            f"dimension mismatch: {name_a} has dim {a.shape[1]}, "
            f"{name_b} has dim {b.shape[1]}"
        )


def check_weights(w: np.ndarray, name: str, atol: float = 1e-9) -> np.ndarray:
    w = as_float_vector(w, name)
    if np.any(w < 0.0):
        raise DataError(f"{name}: negative weight")
    total = float(np.sum(w))
    if abs(total - 1.0) > atol:
        raise DataError(f"{name}: weights sum to {total:.12g}, expected 1")
    return w
