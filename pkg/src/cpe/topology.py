"""Zero-dimensional persistence of a finite point cloud under cosine distance.

Only degree-0 homology is needed here: the finite bar deaths are exactly the
edge weights at which clusters merge while sweeping the distance threshold
upward, i.e. the minimum-spanning-tree edge weights of the complete graph.
That gives an O(n^2 log n) Kruskal pass with union-find instead of a general
persistence engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .formats import EmbeddingSet
from .validation import as_float_matrix, check_unit_rows


@dataclass
class PersistenceDiagram:
    """Finite (birth, death) bars plus the count of never-dying components."""

    finite_bars: np.ndarray  # (n-1, 2), births all 0 for a distance filtration
    essential_count: int

    @property
    def deaths(self) -> np.ndarray:
        return self.finite_bars[:, 1]


def cosine_distance_matrix(f) -> np.ndarray:
    """Pairwise 1 - cosine similarity, clamped to [0, 2], zero diagonal."""
    if isinstance(f, EmbeddingSet):
        f = f.as_float64()
    f = as_float_matrix(f, "embeddings")
    check_unit_rows(f, "embeddings")
    sims = np.clip(f @ f.T, -1.0, 1.0)
    d = np.clip(1.0 - sims, 0.0, 2.0)
    # exact symmetry and zero diagonal regardless of float round-off
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


class _UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[ry] = rx
        return True


def zero_dim_persistence(d: np.ndarray) -> PersistenceDiagram:
    """Degree-0 diagram of the Vietoris-Rips filtration over a distance matrix.

    Edges are scanned in ascending weight, ties broken by (i, j) order; each
    edge that joins two components contributes one bar (0, weight). Exactly
    n - 1 bars result and one component survives to infinity.
    """
    d = as_float_matrix(d, "distance matrix")
    n = d.shape[0]
    if d.shape[1] != n:
        raise DataError(f"distance matrix must be square, got {d.shape}")
    if not np.allclose(d, d.T, atol=1e-9):
        raise DataError("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(d)) > 0.0):
        raise DataError("distance matrix has a nonzero diagonal")
    if n == 1:
        return PersistenceDiagram(np.empty((0, 2)), essential_count=1)

    ii, jj = np.triu_indices(n, k=1)
    weights = d[ii, jj]
    order = np.argsort(weights, kind="stable")  # stable keeps (i, j) tie order

    uf = _UnionFind(n)
    deaths = np.empty(n - 1)
    found = 0
    for e in order:
        if uf.union(int(ii[e]), int(jj[e])):
            deaths[found] = weights[e]
            found += 1
            if found == n - 1:
                break
    bars = np.column_stack([np.zeros(n - 1), deaths])
    return PersistenceDiagram(bars, essential_count=1)


def total_persistence(diag: PersistenceDiagram, n: int) -> float:
    """Mean finite bar length; 0 for a single point."""
    if n < 1:
        raise DataError("point count must be >= 1")
    lengths = diag.finite_bars[:, 1] - diag.finite_bars[:, 0]
    return float(np.sum(lengths) / max(n - 1, 1))
