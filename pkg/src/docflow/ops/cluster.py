"""Spherical k-means over unit-norm embeddings.

Fixed contract: k-means++ seeding from a given seed, cosine distance on
L2-normalized vectors, at most 100 iterations, convergence when no centroid
moves more than 1e-4.
"""

from __future__ import annotations

import random

import numpy as np

from docflow.errors import DocflowError


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return x / norms


def _kmeanspp_init(x: np.ndarray, k: int, rng: random.Random) -> np.ndarray:
    n = x.shape[0]
    centers = [rng.randrange(n)]
    # cosine distance = 1 - dot for unit vectors
    dist = 1.0 - x @ x[centers[0]]
    dist = np.clip(dist, 0.0, None)
    for _ in range(1, k):
        total = float(dist.sum())
        if total <= 1e-12:
            # all remaining points coincide with a center; pick deterministically
            candidates = [i for i in range(n) if i not in centers]
            centers.append(candidates[0] if candidates else centers[-1])
        else:
            r = rng.random() * total
            cum = np.cumsum(dist)
            idx = int(np.searchsorted(cum, r, side="right"))
            idx = min(idx, n - 1)
            centers.append(idx)
        dist = np.minimum(dist, np.clip(1.0 - x @ x[centers[-1]], 0.0, None))
    return x[centers].copy()


def kmeans_cosine(
    vectors: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    tol: float = 1e-4,
) -> np.ndarray:
    """Cluster row vectors; returns an int label array in [0, k)."""
    if k < 1:
        raise DocflowError("k must be >= 1")
    n = vectors.shape[0]
    if n < k:
        raise DocflowError(f"cannot form {k} clusters from {n} documents")
    x = _normalize_rows(np.asarray(vectors, dtype=np.float64))
    rng = random.Random(seed)
    centroids = _kmeanspp_init(x, k, rng)

    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        sims = x @ centroids.T
        labels = np.argmax(sims, axis=1)
        new_centroids = centroids.copy()
        for c in range(k):
            members = x[labels == c]
            if len(members) == 0:
                # re-seed an empty cluster with the point farthest from its centroid
                worst = int(np.argmin(np.max(sims, axis=1)))
                new_centroids[c] = x[worst]
                continue
            mean = members.mean(axis=0)
            norm = np.linalg.norm(mean)
            new_centroids[c] = mean / norm if norm > 1e-12 else members[0]
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift <= tol:
            break
    sims = x @ centroids.T
    return np.argmax(sims, axis=1)
