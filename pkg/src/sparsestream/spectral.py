"""Affinity construction and normalized-cuts partitioning.

The coefficient matrix from the solver is symmetrized into a similarity
graph W = |Z| + |Z'|, and the graph is split into m microclusters with
the standard spectral realization of normalized cuts: eigenvectors of
the m smallest eigenvalues of the symmetric normalized Laplacian,
row-normalized, then k-means in the embedding.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .model import ClusterLevel, ClusterSet


def build_affinity(Z) -> np.ndarray:
    """Symmetric non-negative affinity W = |Z| + |Z'|."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise InvalidInput("coefficient matrix must be square")
    if not np.all(np.isfinite(Z)):
        raise InvalidInput("coefficient matrix contains NaN/Inf entries")
    A = np.abs(Z)
    return A + A.T


def kmeans(points, k: int, seed: int, n_init: int = 10, max_iters: int = 300):
    """Seeded k-means with k-means++ starts, best of ``n_init`` by WCSS.

    Returns integer assignments of length n. Cells may come back empty
    (their centroid attracted no points); callers drop them. Fully
    deterministic for a given seed.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if k > n:
        raise InvalidInput(f"k={k} exceeds the number of points {n}")
    if k == n:
        return np.arange(n)
    rng = np.random.default_rng(seed)

    best_labels = None
    best_wcss = np.inf
    for _ in range(n_init):
        centers = _kmeanspp_init(points, k, rng)
        labels = None
        for _ in range(max_iters):
            dist = _sq_distances(points, centers)
            new_labels = np.argmin(dist, axis=1)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for c in range(k):
                mask = labels == c
                if np.any(mask):
                    centers[c] = points[mask].mean(axis=0)
        dist = _sq_distances(points, centers)
        wcss = float(np.sum(dist[np.arange(n), labels]))
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels
    return best_labels


def _kmeanspp_init(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = rng.integers(n)
    centers[0] = points[first]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centers[c] = points[idx]
        closest = np.minimum(closest, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _sq_distances(points, centers):
    diff = points[:, None, :] - centers[None, :, :]
    return np.sum(diff * diff, axis=2)


def spectral_embedding(W, m: int) -> np.ndarray:
    """Rows of the m bottom eigenvectors of L_sym, normalized to unit length.

    Isolated vertices (zero degree) keep a zero embedding row and are
    assigned by k-means like any other point.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    deg = W.sum(axis=1)
    dinv = np.zeros(n)
    np.divide(1.0, np.sqrt(deg), out=dinv, where=deg > 0)
    N = dinv[:, None] * W * dinv[None, :]
    N = (N + N.T) / 2.0
    # eigenvectors of the m largest eigenvalues of N == m smallest of L_sym
    _, vecs = np.linalg.eigh(N)
    emb = vecs[:, -m:]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    return np.divide(emb, norms, out=np.zeros_like(emb), where=norms > 0)


def ncuts(W, m: int, seed: int) -> ClusterSet:
    """Partition the affinity graph into at most m microclusters.

    An all-zero affinity carries no information; in that degenerate case
    objects are dealt round-robin into m singleton-ish clusters so the
    stream can proceed. Empty k-means cells are dropped, so the result
    may have fewer than m clusters.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if m < 1 or m > n:
        raise InvalidInput(f"cluster count m={m} invalid for {n} objects")
    if not np.any(W):
        # degenerate affinity fallback
        return ClusterSet.from_assignments(np.arange(n) % m, ClusterLevel.MICRO)
    emb = spectral_embedding(W, m)
    labels = kmeans(emb, m, seed)
    return ClusterSet.from_assignments(labels, ClusterLevel.MICRO)
