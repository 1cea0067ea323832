import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def subspace_window(rng, d=20, r=2, k=3, per_cluster=20, unit_norm=True):
    """Exact union-of-subspaces window; returns (X, labels, bases)."""
    bases = [np.linalg.qr(rng.standard_normal((d, r)))[0] for _ in range(k)]
    cols, labels = [], []
    for c in range(k):
        P = bases[c] @ rng.standard_normal((r, per_cluster))
        if unit_norm:
            P = P / np.linalg.norm(P, axis=0, keepdims=True)
        cols.append(P)
        labels.extend([c] * per_cluster)
    return np.hstack(cols), np.array(labels), bases
