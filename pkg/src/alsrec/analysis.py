"""Latent-space geometry: 2D PCA projection and nearest-neighbor queries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Projection2D:
    item_ids: np.ndarray
    coords: np.ndarray                  # n x 2
    explained_variance_ratio: np.ndarray  # length 2, non-increasing
    components: np.ndarray              # 2 x k, orthonormal rows


def pca_project(V: np.ndarray, item_subset=None) -> Projection2D:
    """Project item trait vectors onto their top-2 principal directions.

    Uses SVD of the row-centered matrix rather than a covariance
    eigendecomposition, for numerical stability.  Sign convention: each
    component's largest-magnitude entry is positive, so outputs are
    stable across runs.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] < 2:
        raise ValueError("need trait vectors with at least 2 dimensions")
    if item_subset is None:
        ids = np.arange(V.shape[0], dtype=np.int64)
    else:
        ids = np.asarray(item_subset, dtype=np.int64)
    X = V[ids]
    if X.shape[0] < 2:
        raise ValueError("need at least 2 items to project")
    Xc = X - X.mean(axis=0)
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    components = Vt[:2].copy()
    for c in range(2):
        j = np.argmax(np.abs(components[c]))
        if components[c, j] < 0:
            components[c] = -components[c]
    coords = Xc @ components.T
    total = float(np.sum(s ** 2))
    evr = (s[:2] ** 2) / total if total > 0 else np.zeros(2)
    return Projection2D(ids, coords, np.asarray(evr, dtype=np.float64), components)


def nearest_neighbors(V: np.ndarray, item: int, n: int,
                      metric: str = "cosine") -> np.ndarray:
    """Ids of the n items closest to `item`, query excluded.

    Ordered by ascending euclidean distance or descending cosine
    similarity; ties break by ascending id.
    """
    V = np.asarray(V, dtype=np.float64)
    n_items = V.shape[0]
    if not 0 <= item < n_items:
        raise ValueError(f"item id {item} out of range")
    if not 0 < n < n_items:
        raise ValueError(f"n must be in [1, {n_items - 1}]")
    q = V[item]
    if metric == "euclidean":
        keys = np.linalg.norm(V - q, axis=1)
    elif metric == "cosine":
        norms = np.linalg.norm(V, axis=1) * np.linalg.norm(q)
        with np.errstate(invalid="ignore", divide="ignore"):
            sims = np.where(norms > 0, (V @ q) / norms, 0.0)
        keys = -sims
    else:
        raise ValueError(f"unknown metric {metric!r}")
    ids = np.delete(np.arange(n_items), item)
    order = np.lexsort((ids, keys[ids]))
    return ids[order[:n]]
